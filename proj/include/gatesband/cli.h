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

// The `gates` command line: analyze, calibrate, simulate, demo-correlation.

#ifndef GATESBAND_CLI_H_
#define GATESBAND_CLI_H_

#include <ostream>

namespace gatesband {

// Parses `argv` and runs the chosen subcommand. Results go to `out`;
// failures print one "error: ..." line to `err` and return nonzero.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace gatesband

#endif  // GATESBAND_CLI_H_
