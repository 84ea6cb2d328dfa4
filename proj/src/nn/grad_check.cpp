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
#include "protestlens/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "protestlens/error.hpp"

namespace protestlens::nn {

double relative_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  const double diff = std::abs(analytic - numeric);
  return scale < 1e-7 ? diff : diff / scale;
}

GradCheckReport grad_check(const std::function<double(std::span<const double>)>& f,
                           std::span<const double> point, std::span<const double> analytic,
                           double step, const std::function<bool(std::size_t)>& skip) {
  if (point.size() != analytic.size())
    throw ShapeError("grad_check: point and gradient sizes differ");
  GradCheckReport report;
  std::vector<double> x(point.begin(), point.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (skip && skip(i)) {
      ++report.skipped;
      report.notices.push_back("coordinate " + std::to_string(i) + " skipped: non-smooth");
      continue;
    }
    const double orig = x[i];
    x[i] = orig + step;
    const double up = f(x);
    x[i] = orig - step;
    const double down = f(x);
    x[i] = orig;
    const double numeric = (up - down) / (2.0 * step);
    report.max_rel_error = std::max(report.max_rel_error, relative_error(analytic[i], numeric));
    ++report.checked;
  }
  return report;
}

namespace {

struct Probe {
  double loss;
  std::vector<std::size_t> signature;
};

Probe probe(const Layer& layer, const Tensor2& x, const Tensor2& projection) {
  Tape tape;
  const Tensor2 y = layer.forward(x, &tape);
  return {(y.array() * projection.array()).sum(), layer.branch_signature(tape)};
}

// Perturbs one entry of `target` in place and accumulates into report.
template <typename Eval>
void check_entries(Tensor2& target, const Tensor2& analytic, double step, const std::string& what,
                   Eval&& eval, GradCheckReport& report) {
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    const double orig = target.data()[i];
    target.data()[i] = orig + step;
    const Probe up = eval();
    target.data()[i] = orig - step;
    const Probe down = eval();
    target.data()[i] = orig;
    if (up.signature != down.signature) {
      ++report.skipped;
      report.notices.push_back(what + "[" + std::to_string(i) + "] skipped: branch change");
      continue;
    }
    const double numeric = (up.loss - down.loss) / (2.0 * step);
    report.max_rel_error =
        std::max(report.max_rel_error, relative_error(analytic.data()[i], numeric));
    ++report.checked;
  }
}

}  // namespace

GradCheckReport grad_check_layer(const Layer& layer, const Tensor2& x, CounterRng& rng,
                                 double step) {
  const LayerPtr work = layer.clone();
  const Shape out = work->output_shape(shape_of(x));
  Tensor2 projection(static_cast<Eigen::Index>(out.rows), static_cast<Eigen::Index>(out.cols));
  for (Eigen::Index i = 0; i < projection.size(); ++i) projection.data()[i] = rng.uniform(-1, 1);

  Tape tape;
  work->forward(x, &tape);
  std::vector<Tensor2*> params = work->parameters();
  std::vector<Tensor2> grads;
  for (const Tensor2* p : params) grads.push_back(Tensor2::Zero(p->rows(), p->cols()));
  const Tensor2 dx = work->backward(tape, projection, grads);

  GradCheckReport report;
  Tensor2 input = x;
  check_entries(input, dx, step, "input",
                [&] { return probe(*work, input, projection); }, report);
  const auto names = work->parameter_names();
  for (std::size_t p = 0; p < params.size(); ++p)
    check_entries(*params[p], grads[p], step, names[p],
                  [&] { return probe(*work, x, projection); }, report);
  return report;
}

}  // namespace protestlens::nn
