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
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "protestlens/features.hpp"
#include "protestlens/nn/layers.hpp"
#include "protestlens/nn/optimizer.hpp"

namespace protestlens {

enum class Preset { Model1Task1, Model1Task2, Model2Multitask };

std::string_view preset_name(Preset preset);
// Accepts "model1_task1", "model1_task2", "model2_multitask".
Preset parse_preset(std::string_view name);

// Output head selector. Single-task presets have exactly one head.
enum class Head { Task1, Task2 };

std::string_view head_name(Head head);

struct ModelSpec {
  Preset preset = Preset::Model1Task1;
  std::size_t dim = 0;                // d
  std::size_t positions_task1 = 256;  // L_out for documents
  std::size_t positions_task2 = 32;   // L_out for sentences
  nn::OptimizerConfig optimizer;
  std::size_t epochs = 10;
  std::size_t batch = 32;
  std::uint64_t seed = 42;
  double threshold = 0.5;
  std::size_t workers = 1;

  // Adam for the Model 1 presets, RMSProp for Model 2.
  static ModelSpec for_preset(Preset preset, std::size_t dim);
  // Throws ConfigError on d = 0, batch = 0, workers = 0, a zero length or a
  // threshold outside (0, 1).
  void validate() const;

  bool multitask() const { return preset == Preset::Model2Multitask; }
  std::vector<Head> heads() const;
  std::size_t positions(Head head) const;
};

// One row of a static shape trace.
struct ShapeStep {
  std::string layer;
  nn::Shape input;
  nn::Shape output;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss = 0;        // mean training BCE over the epoch
  std::optional<double> dev_macro_f1;
};

// Shared trunk followed by one layer stack per head. Single-task presets put
// the whole stack in the trunk and have one empty head.
class Model {
 public:
  // Builds the preset stack, runs the static shape check and initialises
  // parameters from spec.seed.
  explicit Model(ModelSpec spec);
  Model(const Model& other);
  Model& operator=(const Model& other);
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  const ModelSpec& spec() const { return spec_; }
  ModelSpec& mutable_spec() { return spec_; }
  std::vector<Head> heads() const { return spec_.heads(); }

  // Layers applied for the head, trunk first.
  std::vector<const nn::Layer*> layers(Head head) const;
  std::vector<std::string> layer_kinds(Head head) const;
  std::vector<std::string> layer_descriptions(Head head) const;
  // Throws ShapeError on any inconsistency.
  std::vector<ShapeStep> shape_check(Head head) const;

  // Flat parameter list: trunk, then each head in order.
  std::vector<nn::Tensor2*> parameters();
  std::vector<const nn::Tensor2*> parameters() const;
  std::vector<std::string> parameter_names() const;
  std::vector<nn::Shape> parameter_shapes() const;
  // Indices into parameters() touched by a pass through the head.
  std::vector<std::size_t> parameter_indices(Head head) const;
  std::size_t scalar_count() const;

  // x is positions x dim. The head is required for the multitask preset.
  double predict_proba(const Tensor2& x, std::optional<Head> head = std::nullopt) const;
  std::vector<double> predict_proba(const FeatureMatrix& data, std::optional<Head> head,
                                    std::size_t workers) const;

  // Forward + backward for one labelled example. grads must be sized like
  // parameters() and is added to. Returns the example loss.
  double accumulate_gradient(const Tensor2& x, int label, Head head,
                             std::span<nn::Tensor2> grads) const;

  const std::vector<EpochRecord>& history() const { return history_; }
  void set_history(std::vector<EpochRecord> history) { history_ = std::move(history); }
  std::optional<std::size_t> best_epoch() const { return best_epoch_; }
  void set_best_epoch(std::optional<std::size_t> epoch) { best_epoch_ = epoch; }

 private:
  std::size_t head_slot(std::optional<Head> head) const;
  void check_input(const Tensor2& x, Head head) const;
  Head resolve(std::optional<Head> head) const;

  ModelSpec spec_;
  std::vector<nn::LayerPtr> trunk_;
  std::vector<std::vector<nn::LayerPtr>> heads_;
  std::vector<EpochRecord> history_;
  std::optional<std::size_t> best_epoch_;
};

Model build_model(const ModelSpec& spec);

// Label 1 iff p > threshold; a tie goes to class 0.
int classify(double p, double threshold);
std::vector<int> classify(std::span<const double> p, double threshold);

// Called after every epoch; returning false stops training.
using EpochCallback = std::function<bool(const EpochRecord&, const Model&)>;

// Mini-batch training of a single-task preset. Examples are reshuffled each
// epoch from the seed. With a labelled dev set the parameters of the best
// dev macro-F1 epoch (earliest on ties) are kept; otherwise the last.
void train(Model& model, const FeatureMatrix& data, const FeatureMatrix* dev = nullptr,
           const EpochCallback& on_epoch = {});

// Multitask training: batches alternate task 1, task 2, task 1, ... until
// both are exhausted. A task-h batch updates the shared trunk and head h only.
// Dev macro-F1 is the mean over the dev sets supplied.
void train_multitask(Model& model, const FeatureMatrix& task1, const FeatureMatrix& task2,
                     const FeatureMatrix* dev1 = nullptr, const FeatureMatrix* dev2 = nullptr,
                     const EpochCallback& on_epoch = {});

// Macro F1 of thresholded predictions against the labels of data.
double dev_macro_f1(const Model& model, const FeatureMatrix& data, std::optional<Head> head);

// Checkpoint: one JSON manifest line (format, version, preset, spec, layers,
// tensors with names and shapes, history) then every parameter tensor as
// little-endian float64, row-major, in manifest order.
void save_checkpoint(const std::filesystem::path& path, const Model& model);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace protestlens
