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
#include "protestlens/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "protestlens/error.hpp"
#include "protestlens/eval.hpp"
#include "protestlens/nn/attention.hpp"
#include "protestlens/nn/loss.hpp"
#include "protestlens/nn/recurrent.hpp"
#include "protestlens/parallel.hpp"
#include "protestlens/rng.hpp"

namespace protestlens {

using nn::Activation;
using nn::LayerPtr;
using nn::Shape;

namespace {

constexpr std::uint64_t kInitStream = 0x494e4954;     // "INIT"
constexpr std::uint64_t kShuffleStream = 0x53487566;  // "SHuf"

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng rng(seed, stream);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

std::string kind_label(const nn::Layer& layer) {
  if (layer.kind() == nn::LayerKind::Bidirectional) {
    const auto& bi = static_cast<const nn::Bidirectional&>(layer);
    return "bi" + std::string(nn::layer_kind_name(bi.forward_layer().kind()));
  }
  return std::string(nn::layer_kind_name(layer.kind()));
}

// Appends layers while tracking the running shape so each Dense gets the
// width produced by the layer before it.
class StackBuilder {
 public:
  explicit StackBuilder(Shape input) : shape_(input) {}

  void add(std::vector<LayerPtr>& stack, LayerPtr layer) {
    shape_ = layer->output_shape(shape_);
    stack.push_back(std::move(layer));
  }
  std::size_t width() const { return shape_.cols; }
  Shape shape() const { return shape_; }

 private:
  Shape shape_;
};

void check_features(const FeatureMatrix& data, const ModelSpec& spec, Head head,
                    std::string_view what) {
  if (data.positions != spec.positions(head) || data.dim != spec.dim)
    throw ShapeError(std::string(what) + ": features are " + std::to_string(data.positions) + "x" +
                     std::to_string(data.dim) + " but the model expects " +
                     std::to_string(spec.positions(head)) + "x" + std::to_string(spec.dim));
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.labels[i] != 0 && data.labels[i] != 1)
      throw DomainError(std::string(what) + ": example '" + data.ids[i] + "' is unlabelled");
}

struct TaskData {
  const FeatureMatrix* train;
  const FeatureMatrix* dev;
  Head head;
};

struct Batch {
  std::size_t task;
  std::vector<std::size_t> rows;
};

std::vector<Batch> epoch_schedule(const std::vector<TaskData>& tasks, const ModelSpec& spec,
                                  std::size_t epoch) {
  std::vector<std::vector<Batch>> per_task;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto order =
        shuffled(tasks[t].train->size(), spec.seed, kShuffleStream + 16 * epoch + t);
    std::vector<Batch> batches;
    for (std::size_t begin = 0; begin < order.size(); begin += spec.batch) {
      const std::size_t end = std::min(order.size(), begin + spec.batch);
      batches.push_back({t, std::vector<std::size_t>(order.begin() + begin, order.begin() + end)});
    }
    per_task.push_back(std::move(batches));
  }
  std::vector<Batch> schedule;
  for (std::size_t k = 0;; ++k) {
    bool any = false;
    for (auto& batches : per_task) {
      if (k < batches.size()) {
        schedule.push_back(std::move(batches[k]));
        any = true;
      }
    }
    if (!any) break;
  }
  return schedule;
}

void run_training(Model& model, const std::vector<TaskData>& tasks, const EpochCallback& on_epoch) {
  const ModelSpec& spec = model.spec();
  spec.validate();
  for (const auto& t : tasks) {
    if (t.train->size() == 0) throw DomainError("train: empty training data");
    check_features(*t.train, spec, t.head, "train");
    if (t.dev) check_features(*t.dev, spec, t.head, "dev");
  }

  const auto params = model.parameters();
  const auto shapes = model.parameter_shapes();
  nn::Optimizer optimizer(spec.optimizer, shapes);

  std::vector<std::vector<std::size_t>> active;
  for (const auto& t : tasks) active.push_back(model.parameter_indices(t.head));

  // One gradient buffer per batch slot; slots are summed in slot order so the
  // result does not depend on the worker count.
  std::vector<std::vector<nn::Tensor2>> slots(spec.batch);
  for (auto& slot : slots)
    for (const Shape& s : shapes)
      slot.emplace_back(static_cast<Eigen::Index>(s.rows), static_cast<Eigen::Index>(s.cols));
  std::vector<nn::Tensor2> grads;
  for (const Shape& s : shapes)
    grads.emplace_back(nn::Tensor2::Zero(static_cast<Eigen::Index>(s.rows),
                                         static_cast<Eigen::Index>(s.cols)));

  const bool has_dev = std::any_of(tasks.begin(), tasks.end(), [](const TaskData& t) {
    return t.dev != nullptr && t.dev->size() > 0;
  });
  std::vector<nn::Tensor2> best_params;
  std::optional<double> best_f1;
  std::optional<std::size_t> best_epoch;
  std::vector<EpochRecord> history;
  std::vector<double> losses(spec.batch);

  for (std::size_t epoch = 1; epoch <= spec.epochs; ++epoch) {
    const auto schedule = epoch_schedule(tasks, spec, epoch);
    double loss_sum = 0;
    std::size_t seen = 0;
    for (std::size_t b = 0; b < schedule.size(); ++b) {
      const Batch& batch = schedule[b];
      const TaskData& task = tasks[batch.task];
      const auto& idx = active[batch.task];
      const std::size_t n = batch.rows.size();
      parallel_for(n, spec.workers, [&](std::size_t i) {
        for (std::size_t k : idx) slots[i][k].setZero();
        const std::size_t row = batch.rows[i];
        losses[i] = model.accumulate_gradient(task.train->example(row), task.train->labels[row],
                                              task.head, slots[i]);
      });
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(losses[i]))
          throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(b + 1) + " (example '" +
                                task.train->ids[batch.rows[i]] + "')");
        loss_sum += losses[i];
      }
      seen += n;
      for (std::size_t k : idx) {
        grads[k] = slots[0][k];
        for (std::size_t i = 1; i < n; ++i) grads[k] += slots[i][k];
        grads[k] /= static_cast<double>(n);
      }
      try {
        optimizer.step(params, grads, idx);
      } catch (const DivergenceError& e) {
        throw DivergenceError("epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(b + 1) + ": " + e.what());
      }
    }

    EpochRecord record{epoch, loss_sum / static_cast<double>(seen), std::nullopt};
    if (has_dev) {
      double f1_sum = 0;
      std::size_t count = 0;
      for (const auto& t : tasks) {
        if (!t.dev || t.dev->size() == 0) continue;
        f1_sum += dev_macro_f1(model, *t.dev, t.head);
        ++count;
      }
      record.dev_macro_f1 = f1_sum / static_cast<double>(count);
      if (!best_f1 || *record.dev_macro_f1 > *best_f1) {
        best_f1 = record.dev_macro_f1;
        best_epoch = epoch;
        best_params.clear();
        for (const auto* p : params) best_params.push_back(*p);
      }
    }
    history.push_back(record);
    if (on_epoch && !on_epoch(record, model)) break;
  }

  if (best_epoch) {
    for (std::size_t k = 0; k < params.size(); ++k) *params[k] = best_params[k];
  } else if (!history.empty()) {
    best_epoch = history.back().epoch;
  }
  model.set_history(std::move(history));
  model.set_best_epoch(best_epoch);
}

}  // namespace

std::string_view preset_name(Preset preset) {
  switch (preset) {
    case Preset::Model1Task1: return "model1_task1";
    case Preset::Model1Task2: return "model1_task2";
    case Preset::Model2Multitask: return "model2_multitask";
  }
  return "?";
}

Preset parse_preset(std::string_view name) {
  for (Preset p : {Preset::Model1Task1, Preset::Model1Task2, Preset::Model2Multitask})
    if (preset_name(p) == name) return p;
  throw ConfigError("unknown preset '" + std::string(name) +
                    "' (expected model1_task1, model1_task2 or model2_multitask)");
}

std::string_view head_name(Head head) { return head == Head::Task1 ? "task1" : "task2"; }

ModelSpec ModelSpec::for_preset(Preset preset, std::size_t dim) {
  ModelSpec spec;
  spec.preset = preset;
  spec.dim = dim;
  spec.optimizer = preset == Preset::Model2Multitask ? nn::OptimizerConfig::rmsprop()
                                                      : nn::OptimizerConfig::adam();
  return spec;
}

void ModelSpec::validate() const {
  if (dim == 0) throw ConfigError("model: embedding dimension must be positive");
  if (positions_task1 == 0 || positions_task2 == 0)
    throw ConfigError("model: input lengths must be positive");
  if (batch == 0) throw ConfigError("model: batch size must be positive");
  if (workers == 0) throw ConfigError("model: workers must be positive");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ConfigError("model: threshold must lie strictly between 0 and 1");
  if (!(optimizer.learning_rate >= 0.0) || !std::isfinite(optimizer.learning_rate))
    throw ConfigError("model: learning rate must be finite and nonnegative");
}

std::vector<Head> ModelSpec::heads() const {
  switch (preset) {
    case Preset::Model1Task1: return {Head::Task1};
    case Preset::Model1Task2: return {Head::Task2};
    case Preset::Model2Multitask: return {Head::Task1, Head::Task2};
  }
  return {};
}

std::size_t ModelSpec::positions(Head head) const {
  return head == Head::Task1 ? positions_task1 : positions_task2;
}

Model::Model(ModelSpec spec) : spec_(spec) {
  spec_.validate();
  switch (spec_.preset) {
    case Preset::Model1Task1: {
      StackBuilder s({spec_.positions_task1, spec_.dim});
      s.add(trunk_, std::make_unique<nn::Conv1d>(spec_.dim, 32, 5, Activation::Relu));
      s.add(trunk_, std::make_unique<nn::MaxPool1d>(3));
      s.add(trunk_, std::make_unique<nn::Conv1d>(32, 32, 4, Activation::Relu));
      s.add(trunk_, std::make_unique<nn::MaxPool1d>(3));
      s.add(trunk_, std::make_unique<nn::Conv1d>(32, 64, 3, Activation::Relu));
      s.add(trunk_, std::make_unique<nn::MaxPool1d>(3));
      s.add(trunk_, std::make_unique<nn::Flatten>());
      s.add(trunk_, std::make_unique<nn::Dense>(s.width(), 64, Activation::Relu));
      s.add(trunk_, std::make_unique<nn::Dense>(64, 1, Activation::Sigmoid));
      heads_.resize(1);
      break;
    }
    case Preset::Model1Task2: {
      StackBuilder s({spec_.positions_task2, spec_.dim});
      s.add(trunk_, nn::make_bigru(spec_.dim, 128, true));
      s.add(trunk_, nn::make_bigru(s.width(), 64, true));
      s.add(trunk_, std::make_unique<nn::AttentionContext>(s.width()));
      s.add(trunk_, std::make_unique<nn::Dense>(s.width(), 64, Activation::Relu));
      s.add(trunk_, std::make_unique<nn::Dense>(64, 1, Activation::Sigmoid));
      heads_.resize(1);
      break;
    }
    case Preset::Model2Multitask: {
      trunk_.push_back(nn::make_bilstm(spec_.dim, 10, false));
      heads_.resize(2);
      for (auto& head : heads_) head.push_back(std::make_unique<nn::Dense>(20, 1, Activation::Sigmoid));
      break;
    }
  }
  for (Head h : heads()) shape_check(h);

  CounterRng rng(spec_.seed, kInitStream);
  for (auto& layer : trunk_) layer->initialize(rng);
  for (auto& head : heads_)
    for (auto& layer : head) layer->initialize(rng);
}

Model::Model(const Model& other)
    : spec_(other.spec_), history_(other.history_), best_epoch_(other.best_epoch_) {
  for (const auto& layer : other.trunk_) trunk_.push_back(layer->clone());
  for (const auto& head : other.heads_) {
    heads_.emplace_back();
    for (const auto& layer : head) heads_.back().push_back(layer->clone());
  }
}

Model& Model::operator=(const Model& other) {
  if (this != &other) *this = Model(other);
  return *this;
}

std::size_t Model::head_slot(std::optional<Head> head) const {
  if (!spec_.multitask()) return 0;
  return *head == Head::Task1 ? 0 : 1;
}

Head Model::resolve(std::optional<Head> head) const {
  const auto hs = heads();
  if (spec_.multitask()) {
    if (!head) throw ConfigError("model2_multitask: a head (task1 or task2) is required");
    return *head;
  }
  if (head && *head != hs.front())
    throw ConfigError(std::string(preset_name(spec_.preset)) + " has no " +
                      std::string(head_name(*head)) + " head");
  return hs.front();
}

std::vector<const nn::Layer*> Model::layers(Head head) const {
  const Head h = resolve(head);
  std::vector<const nn::Layer*> out;
  for (const auto& layer : trunk_) out.push_back(layer.get());
  for (const auto& layer : heads_[head_slot(h)]) out.push_back(layer.get());
  return out;
}

std::vector<std::string> Model::layer_kinds(Head head) const {
  std::vector<std::string> out;
  for (const auto* layer : layers(head)) out.push_back(kind_label(*layer));
  return out;
}

std::vector<std::string> Model::layer_descriptions(Head head) const {
  std::vector<std::string> out;
  for (const auto* layer : layers(head)) out.push_back(layer->describe());
  return out;
}

std::vector<ShapeStep> Model::shape_check(Head head) const {
  const Head h = resolve(head);
  Shape shape{spec_.positions(h), spec_.dim};
  std::vector<ShapeStep> trace;
  for (const auto* layer : layers(h)) {
    Shape out;
    try {
      out = layer->output_shape(shape);
    } catch (const ShapeError& e) {
      throw ShapeError(std::string(preset_name(spec_.preset)) + ": " + layer->describe() +
                       " rejects input " + shape.str() + ": " + e.what());
    }
    trace.push_back({layer->describe(), shape, out});
    shape = out;
  }
  if (shape != Shape{1, 1})
    throw ShapeError(std::string(preset_name(spec_.preset)) + ": output is " + shape.str() +
                     ", expected 1x1");
  return trace;
}

std::vector<nn::Tensor2*> Model::parameters() {
  std::vector<nn::Tensor2*> out;
  for (auto& layer : trunk_)
    for (auto* p : layer->parameters()) out.push_back(p);
  for (auto& head : heads_)
    for (auto& layer : head)
      for (auto* p : layer->parameters()) out.push_back(p);
  return out;
}

std::vector<const nn::Tensor2*> Model::parameters() const {
  auto mut = const_cast<Model*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::vector<std::string> Model::parameter_names() const {
  std::vector<std::string> out;
  auto add = [&](const std::string& prefix, const std::vector<LayerPtr>& stack) {
    for (std::size_t i = 0; i < stack.size(); ++i)
      for (const auto& name : stack[i]->parameter_names())
        out.push_back(prefix + std::to_string(i) + "." + kind_label(*stack[i]) + "." + name);
  };
  add(spec_.multitask() ? "shared." : "", trunk_);
  for (std::size_t h = 0; h < heads_.size(); ++h)
    add("head" + std::to_string(h + 1) + ".", heads_[h]);
  return out;
}

std::vector<Shape> Model::parameter_shapes() const {
  std::vector<Shape> out;
  for (const auto* p : parameters()) out.push_back(nn::shape_of(*p));
  return out;
}

std::vector<std::size_t> Model::parameter_indices(Head head) const {
  const std::size_t slot = head_slot(resolve(head));
  std::vector<std::size_t> out;
  std::size_t k = 0;
  for (const auto& layer : trunk_)
    for (std::size_t i = 0; i < layer->parameter_count(); ++i) out.push_back(k++);
  for (std::size_t h = 0; h < heads_.size(); ++h)
    for (const auto& layer : heads_[h])
      for (std::size_t i = 0; i < layer->parameter_count(); ++i, ++k)
        if (h == slot) out.push_back(k);
  return out;
}

std::size_t Model::scalar_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += static_cast<std::size_t>(p->size());
  return n;
}

void Model::check_input(const Tensor2& x, Head head) const {
  const Shape want{spec_.positions(head), spec_.dim};
  if (nn::shape_of(x) != want)
    throw ShapeError(std::string(preset_name(spec_.preset)) + ": input is " +
                     nn::shape_of(x).str() + ", expected " + want.str());
}

double Model::predict_proba(const Tensor2& x, std::optional<Head> head) const {
  const Head h = resolve(head);
  check_input(x, h);
  Tensor2 a = x;
  for (const auto* layer : layers(h)) a = layer->forward(a, nullptr);
  return a(0, 0);
}

std::vector<double> Model::predict_proba(const FeatureMatrix& data, std::optional<Head> head,
                                         std::size_t workers) const {
  const Head h = resolve(head);
  if (data.positions != spec_.positions(h) || data.dim != spec_.dim)
    throw ShapeError(std::string(preset_name(spec_.preset)) + ": features are " +
                     std::to_string(data.positions) + "x" + std::to_string(data.dim) +
                     ", expected " + std::to_string(spec_.positions(h)) + "x" +
                     std::to_string(spec_.dim));
  std::vector<double> out(data.size());
  parallel_for(data.size(), workers, [&](std::size_t i) { out[i] = predict_proba(data.example(i), h); });
  return out;
}

double Model::accumulate_gradient(const Tensor2& x, int label, Head head,
                                  std::span<nn::Tensor2> grads) const {
  const Head h = resolve(head);
  check_input(x, h);
  const auto stack = layers(h);

  // Offsets of each layer's parameters in the flat list.
  std::vector<std::size_t> offsets;
  std::size_t k = 0;
  for (const auto& layer : trunk_) {
    offsets.push_back(k);
    k += layer->parameter_count();
  }
  const std::size_t slot = head_slot(h);
  for (std::size_t hh = 0; hh < heads_.size(); ++hh)
    for (const auto& layer : heads_[hh]) {
      if (hh == slot) offsets.push_back(k);
      k += layer->parameter_count();
    }

  std::vector<nn::Tape> tapes(stack.size());
  Tensor2 a = x;
  for (std::size_t i = 0; i < stack.size(); ++i) a = stack[i]->forward(a, &tapes[i]);
  const double p = a(0, 0);
  if (!std::isfinite(p)) return p;

  Tensor2 dy(1, 1);
  dy(0, 0) = nn::bce_grad(p, label);
  for (std::size_t i = stack.size(); i-- > 0;)
    dy = stack[i]->backward(tapes[i], dy, grads.subspan(offsets[i], stack[i]->parameter_count()));
  return nn::bce_loss(p, label);
}

Model build_model(const ModelSpec& spec) { return Model(spec); }

int classify(double p, double threshold) { return p > threshold ? 1 : 0; }

std::vector<int> classify(std::span<const double> p, double threshold) {
  std::vector<int> out;
  out.reserve(p.size());
  for (double v : p) out.push_back(classify(v, threshold));
  return out;
}

void train(Model& model, const FeatureMatrix& data, const FeatureMatrix* dev,
           const EpochCallback& on_epoch) {
  if (model.spec().multitask())
    throw ConfigError("model2_multitask is trained with one dataset per task");
  run_training(model, {{&data, dev, model.heads().front()}}, on_epoch);
}

void train_multitask(Model& model, const FeatureMatrix& task1, const FeatureMatrix& task2,
                     const FeatureMatrix* dev1, const FeatureMatrix* dev2,
                     const EpochCallback& on_epoch) {
  if (!model.spec().multitask())
    throw ConfigError(std::string(preset_name(model.spec().preset)) + " is a single-task preset");
  run_training(model, {{&task1, dev1, Head::Task1}, {&task2, dev2, Head::Task2}}, on_epoch);
}

double dev_macro_f1(const Model& model, const FeatureMatrix& data, std::optional<Head> head) {
  const auto probs = model.predict_proba(data, head, model.spec().workers);
  const auto preds = classify(probs, model.spec().threshold);
  return metrics_report(confusion_matrix(data.labels, preds)).macro_f1;
}

}  // namespace protestlens
