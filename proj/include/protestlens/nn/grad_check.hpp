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

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "protestlens/nn/layers.hpp"

namespace protestlens::nn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::vector<std::string> notices;
};

// |a - n| / max(|a|, |n|), or the absolute difference when both magnitudes
// are below 1e-7 (finite-difference noise floor).
double relative_error(double analytic, double numeric);

// Central differences with the given step on f around point, compared with
// the analytic gradient. skip(i) marks coordinates at which f is not smooth.
GradCheckReport grad_check(const std::function<double(std::span<const double>)>& f,
                           std::span<const double> point, std::span<const double> analytic,
                           double step = 1e-5,
                           const std::function<bool(std::size_t)>& skip = {});

// Checks one layer at input x against the scalar loss sum(R .* layer(x)) for
// a random projection R. Every input coordinate and every parameter entry is
// perturbed; a coordinate whose perturbation changes the layer's branch
// signature (max-pool argmax, ReLU sign) is skipped with a notice.
GradCheckReport grad_check_layer(const Layer& layer, const Tensor2& x, CounterRng& rng,
                                 double step = 1e-5);

}  // namespace protestlens::nn
