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
#include <fstream>
#include <string>

#include "json.hpp"
#include "protestlens/error.hpp"
#include "protestlens/models.hpp"

namespace protestlens {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "protestlens-model";
constexpr int kVersion = 1;

json spec_json(const ModelSpec& s) {
  const auto& o = s.optimizer;
  return {{"preset", preset_name(s.preset)},
          {"dim", s.dim},
          {"positions_task1", s.positions_task1},
          {"positions_task2", s.positions_task2},
          {"optimizer",
           {{"kind", nn::optimizer_name(o.kind)},
            {"learning_rate", o.learning_rate},
            {"rho", o.rho},
            {"beta1", o.beta1},
            {"beta2", o.beta2},
            {"epsilon", o.epsilon}}},
          {"epochs", s.epochs},
          {"batch", s.batch},
          {"seed", s.seed},
          {"threshold", s.threshold}};
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec s;
  s.preset = parse_preset(j.at("preset").get<std::string>());
  s.dim = j.at("dim").get<std::size_t>();
  s.positions_task1 = j.at("positions_task1").get<std::size_t>();
  s.positions_task2 = j.at("positions_task2").get<std::size_t>();
  const json& o = j.at("optimizer");
  s.optimizer.kind = nn::parse_optimizer(o.at("kind").get<std::string>());
  s.optimizer.learning_rate = o.at("learning_rate").get<double>();
  s.optimizer.rho = o.at("rho").get<double>();
  s.optimizer.beta1 = o.at("beta1").get<double>();
  s.optimizer.beta2 = o.at("beta2").get<double>();
  s.optimizer.epsilon = o.at("epsilon").get<double>();
  s.epochs = j.at("epochs").get<std::size_t>();
  s.batch = j.at("batch").get<std::size_t>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.threshold = j.at("threshold").get<double>();
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
  json layers = json::array();
  for (Head h : model.heads()) {
    json stack = json::array();
    for (const auto* layer : model.layers(h)) stack.push_back(layer->describe());
    layers.push_back({{"head", head_name(h)}, {"stack", stack}});
  }
  json tensors = json::array();
  const auto names = model.parameter_names();
  const auto shapes = model.parameter_shapes();
  for (std::size_t i = 0; i < names.size(); ++i)
    tensors.push_back({{"name", names[i]}, {"shape", {shapes[i].rows, shapes[i].cols}}});
  json history = json::array();
  for (const auto& r : model.history()) {
    json row = {{"epoch", r.epoch}, {"loss", r.loss}};
    row["dev_macro_f1"] = r.dev_macro_f1 ? json(*r.dev_macro_f1) : json(nullptr);
    history.push_back(row);
  }
  json manifest = {{"format", kFormat},
                   {"version", kVersion},
                   {"spec", spec_json(model.spec())},
                   {"layers", layers},
                   {"tensors", tensors},
                   {"history", history}};
  manifest["best_epoch"] = model.best_epoch() ? json(*model.best_epoch()) : json(nullptr);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << manifest.dump() << '\n';
  for (const auto* p : model.parameters())
    write_f64_le(out, p->data(), static_cast<std::size_t>(p->size()));
  if (!out) throw Error("failed writing " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open checkpoint " + path.string());
  std::string line;
  std::getline(in, line);
  json manifest;
  try {
    manifest = json::parse(line);
    if (manifest.value("format", "") != kFormat)
      throw ParseError(path.string() + ": not a protestlens checkpoint");
    if (manifest.value("version", 0) != kVersion)
      throw ParseError(path.string() + ": unsupported checkpoint version");
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": bad checkpoint manifest: " + e.what());
  }

  try {
    Model model(spec_from_json(manifest.at("spec")));
    const auto names = model.parameter_names();
    const auto shapes = model.parameter_shapes();
    const json& tensors = manifest.at("tensors");
    if (tensors.size() != names.size())
      throw ParseError(path.string() + ": checkpoint lists " + std::to_string(tensors.size()) +
                       " tensors, preset has " + std::to_string(names.size()));
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto shape = tensors[i].at("shape").get<std::vector<std::size_t>>();
      if (tensors[i].at("name").get<std::string>() != names[i] || shape.size() != 2 ||
          shape[0] != shapes[i].rows || shape[1] != shapes[i].cols)
        throw ParseError(path.string() + ": tensor " + std::to_string(i) + " does not match " +
                         names[i] + " " + shapes[i].str());
    }
    for (auto* p : model.parameters()) read_f64_le(in, p->data(), static_cast<std::size_t>(p->size()));
    if (in.peek() != std::char_traits<char>::eof())
      throw ParseError(path.string() + ": trailing bytes after parameter data");

    std::vector<EpochRecord> history;
    for (const auto& r : manifest.value("history", json::array())) {
      EpochRecord rec{r.at("epoch").get<std::size_t>(), r.at("loss").get<double>(), std::nullopt};
      if (!r.at("dev_macro_f1").is_null()) rec.dev_macro_f1 = r.at("dev_macro_f1").get<double>();
      history.push_back(rec);
    }
    model.set_history(std::move(history));
    const json best = manifest.value("best_epoch", json(nullptr));
    if (!best.is_null()) model.set_best_epoch(best.get<std::size_t>());
    return model;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": bad checkpoint manifest: " + e.what());
  }
}

}  // namespace protestlens
