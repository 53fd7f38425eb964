// Copyright 2026 The tnld authors
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

#include "tnld/run_config.hpp"

namespace tnld {

// Exit codes shared by the command layer and the binary.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitNumericError = 2;
inline constexpr int kExitValidationFailure = 3;

int cmd_scgf_scan(const RunConfig& cfg, std::ostream& log);
int cmd_phase_diagram(const RunConfig& cfg, std::ostream& log);
int cmd_sample(const RunConfig& cfg, std::ostream& log);
int cmd_correlator(const RunConfig& cfg, std::ostream& log);
/// Oracle-equivalence suite at small L; prints one line per check. The
/// inject flag deliberately breaks the bra-side conjugation so the trace
/// check must fail (negative control).
int cmd_validate(const RunConfig& cfg, std::ostream& log, bool inject_convention_bug = false);

}  // namespace tnld
