/*
 * Copyright 2026 The GatesBand Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GATESBAND_TEXT_IO_H_
#define GATESBAND_TEXT_IO_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace gatesband {

// Shortest representation that parses back to the same double.
std::string FormatDouble(double value);

// Strict parse of a whole field (surrounding spaces allowed).
std::optional<double> ParseDouble(std::string_view field);

struct CsvRecord {
  int line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

// Splits CSV text into records. Handles quoted fields with embedded commas,
// doubled quotes and newlines; accepts LF or CRLF line endings. Blank lines
// are skipped.
absl::StatusOr<std::vector<CsvRecord>> ParseCsvRecords(std::string_view text);

// Quotes a field if it contains a separator, quote or line break.
std::string CsvEscape(std::string_view field);

absl::StatusOr<std::string> ReadFileToString(const std::string& path);
absl::Status WriteStringToFile(const std::string& path,
                               std::string_view content);

}  // namespace gatesband

#endif  // GATESBAND_TEXT_IO_H_
