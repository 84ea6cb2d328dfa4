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
#include "protestlens/nn/recurrent.hpp"

#include <string>

#include "protestlens/error.hpp"

namespace protestlens::nn {

namespace {

RowVector sigmoid_row(const RowVector& z) {
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

RowVector tanh_row(const RowVector& z) { return z.array().tanh().matrix(); }

Shape recurrent_output_shape(std::string_view name, Shape input, std::size_t in, std::size_t h) {
  if (input.cols != in)
    throw ShapeError(std::string(name) + ": expected " + std::to_string(in) +
                     " input features, got " + input.str());
  if (input.rows == 0) throw ShapeError(std::string(name) + ": empty sequence");
  return {input.rows, h};
}

}  // namespace

// ---------------------------------------------------------------- GRU

Gru::Gru(std::size_t input, std::size_t hidden) : input_(input), hidden_(hidden) {
  if (input == 0 || hidden == 0) throw ConfigError("gru: sizes must be positive");
  add_param("input_weight", 3 * hidden, input);
  add_param("recurrent_weight", 3 * hidden, hidden);
  add_param("bias", 1, 3 * hidden);
}

std::string Gru::describe() const { return "gru(" + std::to_string(hidden_) + ")"; }

Shape Gru::output_shape(Shape input) const {
  return recurrent_output_shape("gru", input, input_, hidden_);
}

RowVector Gru::step(const RowVector& x, const RowVector& h_prev) const {
  const auto H = static_cast<Eigen::Index>(hidden_);
  if (x.cols() != static_cast<Eigen::Index>(input_) || h_prev.cols() != H)
    throw ShapeError("gru step: expected x of " + std::to_string(input_) + " and h of " +
                     std::to_string(hidden_) + " entries");
  const Tensor2& w = param(0);
  const Tensor2& u = param(1);
  const RowVector xp = x * w.transpose() + param(2);
  const RowVector zr = xp.head(2 * H) + h_prev * u.topRows(2 * H).transpose();
  const RowVector z = sigmoid_row(zr.head(H));
  const RowVector r = sigmoid_row(zr.tail(H));
  const RowVector rh = r.cwiseProduct(h_prev);
  const RowVector c = tanh_row(xp.tail(H) + rh * u.bottomRows(H).transpose());
  return (RowVector::Ones(H) - z).cwiseProduct(h_prev) + z.cwiseProduct(c);
}

Tensor2 Gru::forward(const Tensor2& x, Tape* tape) const {
  output_shape(shape_of(x));
  const auto L = x.rows();
  const auto H = static_cast<Eigen::Index>(hidden_);
  const Tensor2& u = param(1);
  const auto u_zr = u.topRows(2 * H);
  const auto u_c = u.bottomRows(H);

  Tensor2 xp = x * param(0).transpose();
  xp.rowwise() += param(2).row(0);

  Tensor2 hs = Tensor2::Zero(L + 1, H);
  Tensor2 zs(L, H), rs(L, H), cs(L, H), rhs(L, H);
  RowVector zr(2 * H), c(H), rh(H);
  for (Eigen::Index t = 0; t < L; ++t) {
    const auto hp = hs.row(t);
    zr.noalias() = hp * u_zr.transpose();
    zr += xp.row(t).head(2 * H);
    for (Eigen::Index j = 0; j < 2 * H; ++j) zr[j] = sigmoid(zr[j]);
    const auto z = zr.head(H);
    const auto r = zr.tail(H);
    rh = r.cwiseProduct(hp);
    c.noalias() = rh * u_c.transpose();
    c = (c + xp.row(t).tail(H)).array().tanh().matrix();
    hs.row(t + 1) = hp + z.cwiseProduct(c - hp);
    zs.row(t) = z;
    rs.row(t) = r;
    cs.row(t) = c;
    rhs.row(t) = rh;
  }
  if (tape) {
    tape->saved = {x, hs, zs, rs, cs, rhs};
    tape->recorded = true;
  }
  return hs.bottomRows(L);
}

Tensor2 Gru::backward(const Tape& tape, const Tensor2& dy, std::span<Tensor2> grads) const {
  require_tape(tape, "gru");
  const Tensor2& x = tape.saved[0];
  const Tensor2& hs = tape.saved[1];
  const Tensor2& zs = tape.saved[2];
  const Tensor2& rs = tape.saved[3];
  const Tensor2& cs = tape.saved[4];
  const Tensor2& rhs = tape.saved[5];
  const auto L = x.rows();
  const auto H = static_cast<Eigen::Index>(hidden_);
  const Tensor2& u = param(1);
  const auto u_zr = u.topRows(2 * H);
  const auto u_c = u.bottomRows(H);

  Tensor2 da(L, 3 * H);
  RowVector dh_next = RowVector::Zero(H);
  RowVector dh(H), dhp(H), drh(H), dac(H), daz(H), dar(H);
  for (Eigen::Index t = L - 1; t >= 0; --t) {
    const auto hp = hs.row(t);
    const auto z = zs.row(t);
    const auto r = rs.row(t);
    const auto c = cs.row(t);
    dh = dy.row(t) + dh_next;
    dac = dh.cwiseProduct(z).cwiseProduct((1.0 - c.array().square()).matrix());
    dhp = dh.cwiseProduct((1.0 - z.array()).matrix());
    drh.noalias() = dac * u_c;
    dhp += drh.cwiseProduct(r);
    daz = (dh.array() * (c - hp).array() * z.array() * (1.0 - z.array())).matrix();
    dar = (drh.array() * hp.array() * r.array() * (1.0 - r.array())).matrix();
    da.row(t).head(H) = daz;
    da.row(t).segment(H, H) = dar;
    da.row(t).tail(H) = dac;
    dhp.noalias() += da.row(t).head(2 * H) * u_zr;
    dh_next = dhp;
  }
  grads[0].noalias() += da.transpose() * x;
  grads[1].topRows(2 * H).noalias() += da.leftCols(2 * H).transpose() * hs.topRows(L);
  grads[1].bottomRows(H).noalias() += da.rightCols(H).transpose() * rhs;
  grads[2] += da.colwise().sum();
  return da * param(0);
}

void Gru::initialize(CounterRng& rng) {
  glorot_uniform(input_weight(), input_, 3 * hidden_, rng);
  glorot_uniform(recurrent_weight(), hidden_, 3 * hidden_, rng);
  bias().setZero();
}

// ---------------------------------------------------------------- LSTM

Lstm::Lstm(std::size_t input, std::size_t hidden) : input_(input), hidden_(hidden) {
  if (input == 0 || hidden == 0) throw ConfigError("lstm: sizes must be positive");
  add_param("input_weight", 4 * hidden, input);
  add_param("recurrent_weight", 4 * hidden, hidden);
  add_param("bias", 1, 4 * hidden);
}

std::string Lstm::describe() const { return "lstm(" + std::to_string(hidden_) + ")"; }

Shape Lstm::output_shape(Shape input) const {
  return recurrent_output_shape("lstm", input, input_, hidden_);
}

std::pair<RowVector, RowVector> Lstm::step(const RowVector& x, const RowVector& h_prev,
                                           const RowVector& c_prev) const {
  const auto H = static_cast<Eigen::Index>(hidden_);
  if (x.cols() != static_cast<Eigen::Index>(input_) || h_prev.cols() != H || c_prev.cols() != H)
    throw ShapeError("lstm step: expected x of " + std::to_string(input_) + " and states of " +
                     std::to_string(hidden_) + " entries");
  const RowVector a = x * param(0).transpose() + h_prev * param(1).transpose() + param(2);
  const RowVector i = sigmoid_row(a.segment(0, H));
  const RowVector f = sigmoid_row(a.segment(H, H));
  const RowVector g = tanh_row(a.segment(2 * H, H));
  const RowVector o = sigmoid_row(a.segment(3 * H, H));
  RowVector c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  RowVector h = o.cwiseProduct(tanh_row(c));
  return {std::move(h), std::move(c)};
}

Tensor2 Lstm::forward(const Tensor2& x, Tape* tape) const {
  output_shape(shape_of(x));
  const auto L = x.rows();
  const auto H = static_cast<Eigen::Index>(hidden_);
  const Tensor2& u = param(1);

  Tensor2 xp = x * param(0).transpose();
  xp.rowwise() += param(2).row(0);

  Tensor2 hs = Tensor2::Zero(L + 1, H);
  Tensor2 cs = Tensor2::Zero(L + 1, H);
  Tensor2 gates(L, 4 * H), tcs(L, H);
  RowVector a(4 * H);
  for (Eigen::Index t = 0; t < L; ++t) {
    a.noalias() = hs.row(t) * u.transpose();
    a += xp.row(t);
    for (Eigen::Index j = 0; j < 4 * H; ++j)
      a[j] = (j >= 2 * H && j < 3 * H) ? std::tanh(a[j]) : sigmoid(a[j]);
    const auto i = a.segment(0, H);
    const auto f = a.segment(H, H);
    const auto g = a.segment(2 * H, H);
    const auto o = a.segment(3 * H, H);
    cs.row(t + 1) = f.cwiseProduct(cs.row(t)) + i.cwiseProduct(g);
    tcs.row(t) = cs.row(t + 1).array().tanh().matrix();
    hs.row(t + 1) = o.cwiseProduct(tcs.row(t));
    gates.row(t) = a;
  }
  if (tape) {
    tape->saved = {x, hs, cs, gates, tcs};
    tape->recorded = true;
  }
  return hs.bottomRows(L);
}

Tensor2 Lstm::backward(const Tape& tape, const Tensor2& dy, std::span<Tensor2> grads) const {
  require_tape(tape, "lstm");
  const Tensor2& x = tape.saved[0];
  const Tensor2& hs = tape.saved[1];
  const Tensor2& cs = tape.saved[2];
  const Tensor2& gates = tape.saved[3];
  const Tensor2& tcs = tape.saved[4];
  const auto L = x.rows();
  const auto H = static_cast<Eigen::Index>(hidden_);
  const Tensor2& u = param(1);

  Tensor2 da(L, 4 * H);
  RowVector dh_next = RowVector::Zero(H);
  RowVector dc_next = RowVector::Zero(H);
  RowVector dh(H), dc(H);
  for (Eigen::Index t = L - 1; t >= 0; --t) {
    const auto i = gates.row(t).segment(0, H).array();
    const auto f = gates.row(t).segment(H, H).array();
    const auto g = gates.row(t).segment(2 * H, H).array();
    const auto o = gates.row(t).segment(3 * H, H).array();
    const auto tc = tcs.row(t).array();
    dh = dy.row(t) + dh_next;
    dc = (dc_next.array() + dh.array() * o * (1.0 - tc.square())).matrix();
    da.row(t).segment(0, H) = (dc.array() * g * i * (1.0 - i)).matrix();
    da.row(t).segment(H, H) = (dc.array() * cs.row(t).array() * f * (1.0 - f)).matrix();
    da.row(t).segment(2 * H, H) = (dc.array() * i * (1.0 - g.square())).matrix();
    da.row(t).segment(3 * H, H) = (dh.array() * tc * o * (1.0 - o)).matrix();
    dc_next = (dc.array() * f).matrix();
    dh_next.noalias() = da.row(t) * u;
  }
  grads[0].noalias() += da.transpose() * x;
  grads[1].noalias() += da.transpose() * hs.topRows(L);
  grads[2] += da.colwise().sum();
  return da * param(0);
}

void Lstm::initialize(CounterRng& rng) {
  glorot_uniform(input_weight(), input_, 4 * hidden_, rng);
  glorot_uniform(recurrent_weight(), hidden_, 4 * hidden_, rng);
  bias().setZero();
}

// ---------------------------------------------------------------- Bidirectional

namespace {

std::size_t recurrent_hidden(const Layer& layer) {
  if (auto* gru = dynamic_cast<const Gru*>(&layer)) return gru->hidden_size();
  if (auto* lstm = dynamic_cast<const Lstm*>(&layer)) return lstm->hidden_size();
  throw ConfigError("bidirectional: wrapped layer must be gru or lstm");
}

}  // namespace

Bidirectional::Bidirectional(LayerPtr forward_layer, LayerPtr backward_layer,
                             bool return_sequences)
    : fwd_(std::move(forward_layer)),
      bwd_(std::move(backward_layer)),
      return_sequences_(return_sequences),
      hidden_(recurrent_hidden(*fwd_)) {
  if (fwd_->kind() != bwd_->kind() || recurrent_hidden(*bwd_) != hidden_)
    throw ConfigError("bidirectional: directions must wrap identical layer types");
}

std::string Bidirectional::describe() const {
  const std::string prefix = fwd_->kind() == LayerKind::Gru ? "bigru(" : "bilstm(";
  return prefix + std::to_string(hidden_) + (return_sequences_ ? ")" : ",final)");
}

Shape Bidirectional::output_shape(Shape input) const {
  const Shape inner = fwd_->output_shape(input);
  return {return_sequences_ ? inner.rows : 1, 2 * inner.cols};
}

Tensor2 Bidirectional::forward(const Tensor2& x, Tape* tape) const {
  output_shape(shape_of(x));
  const auto L = x.rows();
  const auto H = static_cast<Eigen::Index>(hidden_);
  Tape* tf = nullptr;
  Tape* tb = nullptr;
  if (tape) {
    tape->children.assign(2, Tape{});
    tf = &tape->children[0];
    tb = &tape->children[1];
  }
  const Tensor2 reversed = x.colwise().reverse();
  const Tensor2 yf = fwd_->forward(x, tf);
  const Tensor2 yb = bwd_->forward(reversed, tb);
  Tensor2 out;
  if (return_sequences_) {
    out.resize(L, 2 * H);
    out.leftCols(H) = yf;
    out.rightCols(H) = yb.colwise().reverse();
  } else {
    out.resize(1, 2 * H);
    out.leftCols(H) = yf.row(L - 1);
    out.rightCols(H) = yb.row(L - 1);
  }
  if (tape) {
    tape->index = {static_cast<std::size_t>(L)};
    tape->recorded = true;
  }
  return out;
}

Tensor2 Bidirectional::backward(const Tape& tape, const Tensor2& dy,
                                std::span<Tensor2> grads) const {
  require_tape(tape, "bidirectional");
  const auto L = static_cast<Eigen::Index>(tape.index[0]);
  const auto H = static_cast<Eigen::Index>(hidden_);
  Tensor2 dyf, dyb;
  if (return_sequences_) {
    dyf = dy.leftCols(H);
    dyb = dy.rightCols(H).colwise().reverse();
  } else {
    dyf = Tensor2::Zero(L, H);
    dyb = Tensor2::Zero(L, H);
    dyf.row(L - 1) = dy.leftCols(H);
    dyb.row(L - 1) = dy.rightCols(H);
  }
  const std::size_t nf = fwd_->parameter_count();
  const Tensor2 dxf = fwd_->backward(tape.children[0], dyf, grads.first(nf));
  const Tensor2 dxb = bwd_->backward(tape.children[1], dyb, grads.subspan(nf));
  return dxf + Tensor2(dxb.colwise().reverse());
}

std::vector<Tensor2*> Bidirectional::parameters() {
  auto out = fwd_->parameters();
  auto back = bwd_->parameters();
  out.insert(out.end(), back.begin(), back.end());
  return out;
}

std::vector<std::string> Bidirectional::parameter_names() const {
  std::vector<std::string> out;
  for (const auto& n : fwd_->parameter_names()) out.push_back("fwd." + n);
  for (const auto& n : bwd_->parameter_names()) out.push_back("bwd." + n);
  return out;
}

void Bidirectional::initialize(CounterRng& rng) {
  fwd_->initialize(rng);
  bwd_->initialize(rng);
}

std::unique_ptr<Layer> Bidirectional::clone() const {
  return std::make_unique<Bidirectional>(fwd_->clone(), bwd_->clone(), return_sequences_);
}

std::unique_ptr<Bidirectional> make_bigru(std::size_t input, std::size_t hidden,
                                          bool return_sequences) {
  return std::make_unique<Bidirectional>(std::make_unique<Gru>(input, hidden),
                                         std::make_unique<Gru>(input, hidden), return_sequences);
}

std::unique_ptr<Bidirectional> make_bilstm(std::size_t input, std::size_t hidden,
                                           bool return_sequences) {
  return std::make_unique<Bidirectional>(std::make_unique<Lstm>(input, hidden),
                                         std::make_unique<Lstm>(input, hidden), return_sequences);
}

}  // namespace protestlens::nn
