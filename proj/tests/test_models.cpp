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
#include <cmath>

#include "doctest.h"
#include "protestlens/error.hpp"
#include "protestlens/models.hpp"
#include "protestlens/nn/recurrent.hpp"
#include "support/fixtures.hpp"

using namespace protestlens;
using protestlens::testing::random_matrix;
using protestlens::testing::separable_features;

namespace {

using Strings = std::vector<std::string>;

void zero_all(Model& m) {
  for (auto* p : m.parameters()) p->setZero();
}

std::vector<nn::Tensor2> snapshot(const Model& m) {
  std::vector<nn::Tensor2> out;
  for (const auto* p : m.parameters()) out.push_back(*p);
  return out;
}

ModelSpec small_spec(Preset preset, std::size_t dim, std::size_t positions) {
  ModelSpec s = ModelSpec::for_preset(preset, dim);
  s.positions_task1 = preset == Preset::Model1Task1 ? 256 : positions;
  s.positions_task2 = positions;
  return s;
}

}  // namespace

TEST_CASE("presets and layer stacks") {
  CHECK(parse_preset("model2_multitask") == Preset::Model2Multitask);
  CHECK_THROWS_AS(parse_preset("model3"), ConfigError);
  CHECK(ModelSpec::for_preset(Preset::Model1Task1, 8).optimizer.kind == nn::OptimizerKind::Adam);
  CHECK(ModelSpec::for_preset(Preset::Model2Multitask, 8).optimizer.kind == nn::OptimizerKind::RmsProp);

  const Model m1(ModelSpec::for_preset(Preset::Model1Task1, 8));
  CHECK(m1.layer_kinds(Head::Task1) == Strings{"conv1d", "maxpool1d", "conv1d", "maxpool1d", "conv1d",
                                               "maxpool1d", "flatten", "dense", "dense"});
  CHECK(m1.layer_descriptions(Head::Task1) ==
        Strings{"conv1d(32,k5)", "maxpool1d(3)", "conv1d(32,k4)", "maxpool1d(3)", "conv1d(64,k3)",
                "maxpool1d(3)", "flatten", "dense(64,relu)", "dense(1,sigmoid)"});
  const auto trace = m1.shape_check(Head::Task1);
  CHECK(trace[0].input == nn::Shape{256, 8});
  CHECK(trace[0].output.rows == 252);
  CHECK(trace[5].output == nn::Shape{8, 64});
  CHECK(trace[6].output == nn::Shape{1, 512});

  const Model m2(ModelSpec::for_preset(Preset::Model1Task2, 8));
  CHECK(m2.layer_kinds(Head::Task2) == Strings{"bigru", "bigru", "attention_context", "dense", "dense"});
  const auto t2 = m2.shape_check(Head::Task2);
  CHECK(t2[0].output == nn::Shape{32, 256});
  CHECK(t2[1].output == nn::Shape{32, 128});
  CHECK(t2[2].output == nn::Shape{1, 128});

  const Model m3(ModelSpec::for_preset(Preset::Model2Multitask, 8));
  CHECK(m3.layer_kinds(Head::Task1) == Strings{"bilstm", "dense"});
  CHECK(m3.layer_descriptions(Head::Task2) == Strings{"bilstm(10,final)", "dense(1,sigmoid)"});
  CHECK(m3.shape_check(Head::Task1)[0].input == nn::Shape{256, 8});
  CHECK(m3.shape_check(Head::Task2)[0].input == nn::Shape{32, 8});
  CHECK(m3.shape_check(Head::Task2)[0].output == nn::Shape{1, 20});
  CHECK_THROWS_AS(m1.layers(Head::Task2), ConfigError);

  ModelSpec tiny = ModelSpec::for_preset(Preset::Model1Task1, 8);
  tiny.positions_task1 = 20;
  CHECK_THROWS_AS(Model{tiny}, ShapeError);
}

TEST_CASE("spec validation") {
  ModelSpec s = ModelSpec::for_preset(Preset::Model2Multitask, 4);
  s.threshold = 1.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.threshold = 0.5;
  s.batch = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.batch = 4;
  s.dim = 0;
  CHECK_THROWS_AS(Model{s}, ConfigError);
}

TEST_CASE("classify uses a strict threshold") {
  CHECK(classify(0.6, 0.5) == 1);
  CHECK(classify(0.5, 0.5) == 0);
  CHECK(classify(0.49, 0.25) == 1);
}

TEST_CASE("predict_proba contracts") {
  CounterRng rng(3);
  for (Preset p : {Preset::Model1Task1, Preset::Model1Task2, Preset::Model2Multitask}) {
    Model m(small_spec(p, 3, 6));
    zero_all(m);
    for (Head h : m.heads()) {
      const auto x = random_matrix(m.spec().positions(h), 3, rng);
      CHECK(m.predict_proba(x, h) == 0.5);
    }
  }
  Model mt(small_spec(Preset::Model2Multitask, 3, 6));
  CHECK_THROWS_AS(mt.predict_proba(random_matrix(6, 3, rng)), ConfigError);
  CHECK_THROWS_AS(mt.predict_proba(random_matrix(5, 3, rng), Head::Task2), ShapeError);
  for (int i = 0; i < 1000; ++i) {
    const double p = mt.predict_proba(random_matrix(6, 3, rng, -3, 3), Head::Task2);
    CHECK((p > 0.0 && p < 1.0));
  }
}

TEST_CASE("multitask prediction matches hand-composed layers") {
  CounterRng rng(19);
  const Model m(small_spec(Preset::Model2Multitask, 3, 4));
  const auto x = random_matrix(4, 3, rng);
  const auto stack = m.layers(Head::Task2);
  const auto& bi = static_cast<const nn::Bidirectional&>(*stack[0]);
  const auto& fwd = static_cast<const nn::Lstm&>(bi.forward_layer());
  const auto& bwd = static_cast<const nn::Lstm&>(bi.backward_layer());
  nn::RowVector hf = nn::RowVector::Zero(10), cf = hf, hb = hf, cb = hf;
  for (Eigen::Index t = 0; t < 4; ++t) std::tie(hf, cf) = fwd.step(x.row(t), hf, cf);
  for (Eigen::Index t = 3; t >= 0; --t) std::tie(hb, cb) = bwd.step(x.row(t), hb, cb);
  nn::RowVector z(20);
  z << hf, hb;
  const auto& dense = static_cast<const nn::Dense&>(*stack[1]);
  const double logit = (z * dense.weight().transpose())(0, 0) + dense.bias()(0, 0);
  const double expected = 1.0 / (1.0 + std::exp(-logit));
  CHECK(std::abs(m.predict_proba(x, Head::Task2) - expected) < 1e-10);
}

TEST_CASE("training with zero epochs keeps the initialisation") {
  FeatureMatrix data = separable_features(20, 10, 6, 2, 1);
  ModelSpec s = small_spec(Preset::Model1Task2, 2, 6);
  s.epochs = 0;
  Model trained(s);
  train(trained, data);
  const Model fresh(s);
  CHECK(snapshot(trained) == snapshot(fresh));
  CHECK(trained.history().empty());
}

TEST_CASE("training on a separable set") {
  const FeatureMatrix all = separable_features(240, 120, 256, 2, 5, 3.0);
  FeatureMatrix train_set, dev;
  for (FeatureMatrix* f : {&train_set, &dev}) {
    f->positions = 256;
    f->dim = 2;
    f->rows.resize(0, 512);
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    FeatureMatrix& target = i % 5 == 0 ? dev : train_set;
    target.append(all.ids[i], all.labels[i], EmbeddedSequence{all.example(i)});
  }
  ModelSpec s = ModelSpec::for_preset(Preset::Model1Task1, 2);
  s.epochs = 30;
  Model m(s);
  std::vector<double> losses;
  double best = 0;
  train(m, train_set, &dev, [&](const EpochRecord& r, const Model&) {
    losses.push_back(r.loss);
    best = std::max(best, *r.dev_macro_f1);
    return true;
  });
  REQUIRE(m.history().size() == 30);
  CHECK(losses.back() < losses.front());
  CHECK(best >= 0.95);
  for (std::size_t e = 3; e + 3 < losses.size(); ++e) {
    const double now = losses[e] + losses[e + 1] + losses[e + 2];
    const double next = losses[e + 1] + losses[e + 2] + losses[e + 3];
    CHECK(next <= now);
  }
  // Best epoch retained, earliest on ties.
  std::size_t want = 0;
  for (std::size_t e = 0; e < m.history().size(); ++e)
    if (*m.history()[e].dev_macro_f1 > *m.history()[want].dev_macro_f1) want = e;
  CHECK(*m.best_epoch() == want + 1);
  CHECK(dev_macro_f1(m, dev, std::nullopt) == doctest::Approx(*m.history()[want].dev_macro_f1));
}

TEST_CASE("training is deterministic and worker invariant") {
  const FeatureMatrix data = separable_features(50, 20, 5, 3, 2);
  auto run = [&](std::size_t workers) {
    ModelSpec s = small_spec(Preset::Model1Task2, 3, 5);
    s.epochs = 2;
    s.batch = 8;
    s.workers = workers;
    Model m(s);
    train(m, data, &data);
    return snapshot(m);
  };
  const auto a = run(1);
  CHECK(a == run(1));
  CHECK(a == run(3));
}

TEST_CASE("multitask batches only touch their own head") {
  ModelSpec s = small_spec(Preset::Model2Multitask, 3, 5);
  Model m(s);
  const auto head1 = m.parameter_indices(Head::Task1);
  const auto head2 = m.parameter_indices(Head::Task2);
  const auto names = m.parameter_names();
  std::vector<nn::Tensor2> grads;
  for (const auto* p : m.parameters()) grads.push_back(nn::Tensor2::Zero(p->rows(), p->cols()));
  CounterRng rng(6);
  m.accumulate_gradient(random_matrix(5, 3, rng), 1, Head::Task1, grads);
  for (std::size_t k = 0; k < names.size(); ++k) {
    const bool in_head1 = std::find(head1.begin(), head1.end(), k) != head1.end();
    if (names[k].rfind("head2.", 0) == 0) {
      CHECK(!in_head1);
      CHECK(grads[k].isZero());
    }
    if (names[k].rfind("shared.", 0) == 0) {
      CHECK(in_head1);
      CHECK(std::find(head2.begin(), head2.end(), k) != head2.end());
    }
  }

  nn::Optimizer opt(s.optimizer, m.parameter_shapes());
  const auto before = snapshot(m);
  opt.step(m.parameters(), grads, head1);
  const auto after = snapshot(m);
  bool shared_moved = false;
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k].rfind("head2.", 0) == 0) CHECK(after[k] == before[k]);
    if (names[k].rfind("shared.", 0) == 0 && !(after[k] == before[k])) shared_moved = true;
  }
  CHECK(shared_moved);

  // A full epoch moves both heads.
  const FeatureMatrix t1 = separable_features(12, 6, 5, 3, 1);
  const FeatureMatrix t2 = separable_features(10, 5, 5, 3, 2);
  s.epochs = 1;
  Model full(s);
  const auto init = snapshot(full);
  train_multitask(full, t1, t2, &t1, &t2);
  const auto done = snapshot(full);
  for (std::size_t k = 0; k < names.size(); ++k) CHECK(!(done[k] == init[k]));
  CHECK_THROWS_AS(train(full, t1), ConfigError);
}

TEST_CASE("training errors") {
  ModelSpec s = small_spec(Preset::Model1Task2, 3, 5);
  s.epochs = 1;
  Model m(s);
  FeatureMatrix empty;
  empty.positions = 5;
  empty.dim = 3;
  empty.rows.resize(0, 15);
  CHECK_THROWS_AS(train(m, empty), DomainError);
  CHECK_THROWS_AS(train(m, separable_features(10, 5, 4, 3, 1)), ShapeError);
  FeatureMatrix unlabeled = separable_features(10, 5, 5, 3, 1);
  unlabeled.labels[3] = kUnlabeled;
  CHECK_THROWS_AS(train(m, unlabeled), DomainError);

  Model broken(s);
  (*broken.parameters().front())(0, 0) = NAN;
  try {
    train(broken, separable_features(10, 5, 5, 3, 1));
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
  }
}

TEST_CASE("checkpoint round trip") {
  protestlens::testing::TempDir dir;
  ModelSpec s = small_spec(Preset::Model2Multitask, 3, 5);
  s.epochs = 2;
  Model m(s);
  const FeatureMatrix t1 = separable_features(12, 6, 5, 3, 1);
  train_multitask(m, t1, t1, &t1, nullptr);
  save_checkpoint(dir / "m.ckpt", m);
  const Model back = load_checkpoint(dir / "m.ckpt");
  CHECK(snapshot(back) == snapshot(m));
  CHECK(back.history().size() == 2);
  CHECK(back.best_epoch() == m.best_epoch());
  CHECK(back.spec().optimizer.kind == nn::OptimizerKind::RmsProp);
  CounterRng rng(1);
  const auto x = random_matrix(5, 3, rng);
  CHECK(back.predict_proba(x, Head::Task1) == m.predict_proba(x, Head::Task1));

  const std::string bytes = protestlens::testing::read_text(dir / "m.ckpt");
  CHECK(bytes.find("\"bilstm(10,final)\"") != std::string::npos);
  protestlens::testing::write_text(dir / "short.ckpt", bytes.substr(0, bytes.size() - 1));
  CHECK_THROWS_AS(load_checkpoint(dir / "short.ckpt"), ParseError);
  protestlens::testing::write_text(dir / "long.ckpt", bytes + "x");
  CHECK_THROWS_AS(load_checkpoint(dir / "long.ckpt"), ParseError);
  protestlens::testing::write_text(dir / "junk.ckpt", "{\"format\":\"nope\"}\n");
  CHECK_THROWS_AS(load_checkpoint(dir / "junk.ckpt"), ParseError);
  CHECK_THROWS_AS(load_checkpoint(dir / "none.ckpt"), MissingInputError);
}
