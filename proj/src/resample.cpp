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
#include "protestlens/resample.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "protestlens/error.hpp"
#include "protestlens/rng.hpp"

namespace protestlens {

std::vector<std::size_t> nearest_neighbors(const Tensor2& rows, std::size_t i, std::size_t k) {
  const auto n = static_cast<std::size_t>(rows.rows());
  if (i >= n) throw DomainError("nearest_neighbors: index out of range");
  if (k >= n)
    throw DomainError("nearest_neighbors: k = " + std::to_string(k) + " needs at least " +
                      std::to_string(k + 1) + " rows, class has " + std::to_string(n));
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(n - 1);
  const auto query = rows.row(static_cast<Eigen::Index>(i));
  for (std::size_t j = 0; j < n; ++j)
    if (j != i) dist.emplace_back((rows.row(static_cast<Eigen::Index>(j)) - query).squaredNorm(), j);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t j = 0; j < k; ++j) out[j] = dist[j].second;
  return out;
}

SmoteResult smote_with_origins(const FeatureMatrix& data, std::size_t k, std::uint64_t seed) {
  data.validate();
  const std::size_t positives = data.count(1);
  const std::size_t negatives = data.count(0);
  if (positives + negatives != data.size())
    throw DomainError("smote: every row must be labelled");
  if (positives == 0 || negatives == 0) throw DomainError("smote: both classes must be present");
  if (k == 0) throw DomainError("smote: k must be positive");

  SmoteResult result{data, {}};
  if (positives == negatives) return result;

  const int minority_label = positives < negatives ? 1 : 0;
  const std::size_t deficit = std::max(positives, negatives) - std::min(positives, negatives);
  std::vector<std::size_t> minority;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.labels[i] == minority_label) minority.push_back(i);
  if (minority.size() <= k)
    throw DomainError("smote: minority class has " + std::to_string(minority.size()) +
                      " rows but k = " + std::to_string(k) + " needs at least " +
                      std::to_string(k + 1) + "; use a smaller --smote-k");

  Tensor2 members(static_cast<Eigen::Index>(minority.size()), data.rows.cols());
  for (std::size_t m = 0; m < minority.size(); ++m)
    members.row(static_cast<Eigen::Index>(m)) = data.rows.row(static_cast<Eigen::Index>(minority[m]));
  std::vector<std::vector<std::size_t>> neighbors(minority.size());
  for (std::size_t m = 0; m < minority.size(); ++m) neighbors[m] = nearest_neighbors(members, m, k);

  CounterRng rng(seed, /*stream=*/0x534d4f5445ULL);
  FeatureMatrix& out = result.features;
  const auto start = out.rows.rows();
  out.rows.conservativeResize(start + static_cast<Eigen::Index>(deficit), Eigen::NoChange);
  for (std::size_t s = 0; s < deficit; ++s) {
    const std::size_t m = rng.below(minority.size());
    const std::size_t nn = neighbors[m][rng.below(k)];
    const double lambda = rng.uniform_closed();
    const auto x = members.row(static_cast<Eigen::Index>(m));
    out.rows.row(start + static_cast<Eigen::Index>(s)) =
        x + lambda * (members.row(static_cast<Eigen::Index>(nn)) - x);
    out.labels.push_back(minority_label);
    out.ids.push_back("smote-" + std::to_string(s));
    result.origins.push_back({minority[m], minority[nn], lambda});
  }
  return result;
}

FeatureMatrix smote(const FeatureMatrix& data, std::size_t k, std::uint64_t seed) {
  return smote_with_origins(data, k, seed).features;
}

}  // namespace protestlens
