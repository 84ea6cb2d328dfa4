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

namespace protestlens::nn {

// Probabilities are clipped to [kBceEpsilon, 1 - kBceEpsilon] before the log.
inline constexpr double kBceEpsilon = 1e-7;

double clip_probability(double p);

// Binary cross-entropy -[y ln p + (1 - y) ln(1 - p)] on the clipped p.
double bce_loss(double p, int y);

// dL/dp evaluated at the clipped probability.
double bce_grad(double p, int y);

}  // namespace protestlens::nn
