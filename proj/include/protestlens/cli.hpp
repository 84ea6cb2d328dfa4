// Copyright 2026 The ProtestLens Authors.
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
#include <vector>

namespace protestlens::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;  // invalid configuration or any other stage error
inline constexpr int kMissingInput = 2;
inline constexpr int kDiverged = 3;

// Runs one subcommand (stats, clean, embed, resample, train, predict,
// evaluate, analyze). Reports go to out; diagnostics are one line on err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
// args excludes the program name.
// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args);

}  // namespace protestlens::cli
