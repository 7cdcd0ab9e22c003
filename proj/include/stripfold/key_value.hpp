// Copyright 2026 The stripfold Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STRIPFOLD_KEY_VALUE_HPP_
#define STRIPFOLD_KEY_VALUE_HPP_

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace stripfold {

using KeyValueList = std::vector<std::pair<std::string, std::string>>;

// Parses "key = value" lines. Blank lines and lines starting with '#' are
// skipped; anything else without '=' is a parse error.
KeyValueList parse_key_values(std::istream& in);

double parse_double(const std::string& key, const std::string& text);
int parse_int(const std::string& key, const std::string& text);
bool parse_bool(const std::string& key, const std::string& text);
unsigned long long parse_u64(const std::string& key, const std::string& text);

// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

}  // namespace stripfold

#endif  // STRIPFOLD_KEY_VALUE_HPP_
