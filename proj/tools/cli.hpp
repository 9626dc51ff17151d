// Copyright 2026 The ABAE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
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

namespace abae::cli {

enum ExitCode : int {
  kOk = 0,
  kUnknownCommand = 1,
  kConfigError = 2,
  kMissingInput = 3,
  kRuntimeError = 4,
};

inline const std::vector<std::string> kCommands = {
    "preprocess", "train-embeddings", "fit-kmeans",     "fit-lda",
    "train-abae", "coherence",        "label-aspects",  "summarize",
    "eval-judgments", "profile",      "rerank-eval",    "report"};

// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace abae::cli
