// Copyright 2026 The polyprop Authors.
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

#ifndef POLYPROP_TEXT_H_
#define POLYPROP_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace polyprop {

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}
inline bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_ascii_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

// Lowercases ASCII letters, trims, and collapses whitespace runs to one space.
std::string fold(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

// Reads a whole file; throws IoError.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// Escapes backslash, tab and newline so a field fits one TSV cell.
std::string escape_field(std::string_view s);
std::string unescape_field(std::string_view s);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace polyprop

#endif  // POLYPROP_TEXT_H_
