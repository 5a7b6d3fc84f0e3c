// Copyright 2026 The creodrift Authors
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

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace creodrift::csv {

using Row = std::vector<std::string>;

/// Shortest text that parses back to the same double, with a decimal point
/// for integral values; infinity is written as `inf`.
std::string format_double(double v);

/// Parses a field written by format_double (also accepts `+inf`, `infinity`).
double parse_double(std::string_view field);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

std::string join(const Row& fields);

/// Splits one CSV record, honouring double-quoted fields.
Row split(std::string_view line);

/// Reads all non-empty records from a stream.
std::vector<Row> read(std::istream& in);
std::vector<Row> read_file(const std::string& path);

}  // namespace creodrift::csv
