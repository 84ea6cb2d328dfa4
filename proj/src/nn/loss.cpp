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
#include "protestlens/nn/loss.hpp"

#include <algorithm>
#include <cmath>

namespace protestlens::nn {

double clip_probability(double p) { return std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon); }

double bce_loss(double p, int y) {
  const double q = clip_probability(p);
  return y == 1 ? -std::log(q) : -std::log1p(-q);
}

double bce_grad(double p, int y) {
  const double q = clip_probability(p);
  return y == 1 ? -1.0 / q : 1.0 / (1.0 - q);
}

}  // namespace protestlens::nn
