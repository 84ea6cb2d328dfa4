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
#include "doctest.h"
#include "protestlens/error.hpp"
#include "protestlens/resample.hpp"
#include "support/fixtures.hpp"

using namespace protestlens;

namespace {

FeatureMatrix one_dim(std::vector<double> values, std::vector<int> labels) {
  FeatureMatrix f;
  f.positions = 1;
  f.dim = 1;
  f.rows.resize(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    f.rows(static_cast<Eigen::Index>(i), 0) = values[i];
    f.ids.push_back("r" + std::to_string(i));
  }
  f.labels = std::move(labels);
  return f;
}

}  // namespace

TEST_CASE("nearest neighbours") {
  Tensor2 line(3, 1);
  line << 0, 1, 10;
  CHECK(nearest_neighbors(line, 0, 1) == std::vector<std::size_t>{1});
  CHECK(nearest_neighbors(line, 2, 2) == std::vector<std::size_t>{1, 0});
  Tensor2 dup(4, 2);
  dup << 0, 0, 5, 5, 0, 0, 0, 0;
  CHECK(nearest_neighbors(dup, 0, 2) == std::vector<std::size_t>{2, 3});
  Tensor2 tie(3, 1);
  tie << 0, -1, 1;
  CHECK(nearest_neighbors(tie, 0, 1) == std::vector<std::size_t>{1});
  CHECK_THROWS_AS(nearest_neighbors(line, 0, 3), DomainError);
}

TEST_CASE("smote small cases") {
  const FeatureMatrix balanced = one_dim({0, 1, 2, 3}, {0, 1, 0, 1});
  const FeatureMatrix same = smote(balanced, 1, 3);
  CHECK(same.rows == balanced.rows);
  CHECK(same.labels == balanced.labels);

  const FeatureMatrix f = one_dim({0.0, 1.0, 5, 6, 7, 8}, {1, 1, 0, 0, 0, 0});
  const FeatureMatrix out = smote(f, 1, 42);
  REQUIRE(out.size() == 8);
  CHECK(out.count(1) == 4);
  for (Eigen::Index i = 6; i < 8; ++i) {
    CHECK(out.rows(i, 0) >= 0.0);
    CHECK(out.rows(i, 0) <= 1.0);
    CHECK(out.labels[static_cast<std::size_t>(i)] == 1);
  }
  CHECK(out.ids[6] != out.ids[7]);

  try {
    smote(f, 5, 42);
    FAIL("expected an error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("smaller") != std::string::npos);
  }
  CHECK_THROWS_AS(smote(one_dim({1, 2}, {0, 0}), 1, 1), DomainError);
}

TEST_CASE("smote balances a 769 of 3430 minority") {
  const FeatureMatrix f = protestlens::testing::separable_features(3430, 769, 1, 4, 9);
  const FeatureMatrix out = smote(f, 5, 42);
  CHECK(out.count(1) == 2661);
  CHECK(out.count(0) == 2661);
}

TEST_CASE("smote determinism and segments") {
  const FeatureMatrix f = protestlens::testing::separable_features(60, 15, 2, 3, 4);
  const SmoteResult a = smote_with_origins(f, 5, 7);
  const SmoteResult b = smote_with_origins(f, 5, 7);
  const SmoteResult c = smote_with_origins(f, 5, 8);
  CHECK(a.features.rows == b.features.rows);
  CHECK(!(a.features.rows == c.features.rows));
  CHECK(a.features.rows.topRows(60) == f.rows);
  for (std::size_t s = 0; s < a.origins.size(); ++s) {
    const auto& o = a.origins[s];
    const auto x = f.rows.row(static_cast<Eigen::Index>(o.seed_row));
    const auto nb = f.rows.row(static_cast<Eigen::Index>(o.neighbor_row));
    const nn::RowVector expect = x + o.lambda * (nb - x);
    CHECK((a.features.rows.row(static_cast<Eigen::Index>(60 + s)) - expect).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((o.lambda >= 0.0 && o.lambda <= 1.0));
  }
}
