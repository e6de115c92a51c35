#include "stc/nets/temporal_conv.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace stc::nets {

using ad::Tensor;
using ad::Var;

TemporalConvNet::TemporalConvNet(std::string prefix, std::size_t input_dim, std::size_t width, std::size_t layers,
                                 std::size_t output_dim, double dropout)
    : prefix_(std::move(prefix)),
      input_dim_(input_dim),
      width_(width),
      layers_(layers),
      output_dim_(output_dim),
      dropout_(dropout) {
  if (input_dim == 0 || width == 0 || output_dim == 0) throw std::invalid_argument("TemporalConvNet: zero dimension");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("TemporalConvNet: dropout must lie in [0, 1)");
}

std::string TemporalConvNet::layer_name(std::size_t i, const char* suffix) const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "layer%02zu.", i);
  return prefix_ + buf + suffix;
}

std::vector<std::size_t> TemporalConvNet::dilations() const {
  std::vector<std::size_t> d(layers_);
  for (std::size_t i = 0; i < layers_; ++i) d[i] = std::size_t{1} << i;
  return d;
}

namespace {

Tensor uniform_tensor(ad::Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = uniform(rng, -bound, bound);
  return t;
}

}  // namespace

void TemporalConvNet::init(ad::ParamStore& store, Rng& rng) const {
  store.add(name("in.w"), uniform_tensor({input_dim_, width_}, input_dim_, rng));
  store.add(name("in.b"), uniform_tensor({width_}, input_dim_, rng));
  for (std::size_t i = 0; i < layers_; ++i) {
    store.add(layer_name(i, "dil.w"), uniform_tensor({3, width_, width_}, 3 * width_, rng));
    store.add(layer_name(i, "dil.b"), uniform_tensor({width_}, 3 * width_, rng));
    store.add(layer_name(i, "pw.w"), uniform_tensor({width_, width_}, width_, rng));
    store.add(layer_name(i, "pw.b"), uniform_tensor({width_}, width_, rng));
  }
  store.add(name("out.w"), uniform_tensor({width_, output_dim_}, width_, rng));
  store.add(name("out.b"), uniform_tensor({output_dim_}, width_, rng));
}

void TemporalConvNet::check(const ad::ParamStore& store) const {
  auto expect = [&](const std::string& n, const ad::Shape& shape) {
    if (!store.contains(n)) throw std::invalid_argument("missing parameter '" + n + "'");
    const auto& got = store.at(n).value.shape();
    if (got != shape) throw ad::ShapeError("parameter " + n, got, shape);
  };
  expect(name("in.w"), {input_dim_, width_});
  expect(name("in.b"), {width_});
  for (std::size_t i = 0; i < layers_; ++i) {
    expect(layer_name(i, "dil.w"), {3, width_, width_});
    expect(layer_name(i, "dil.b"), {width_});
    expect(layer_name(i, "pw.w"), {width_, width_});
    expect(layer_name(i, "pw.b"), {width_});
  }
  expect(name("out.w"), {width_, output_dim_});
  expect(name("out.b"), {output_dim_});
}

Var TemporalConvNet::forward(ad::Tape& tape, const Var& x, Rng* rng) const {
  const auto& shape = x.shape();
  if (shape.size() != 2 || shape[1] != input_dim_) {
    throw ad::ShapeError(prefix_ + "forward", shape, ad::Shape{shape.empty() ? 0 : shape[0], input_dim_});
  }
  Var h = ad::add_bias(ad::matmul(x, tape.param(name("in.w"))), tape.param(name("in.b")));
  for (std::size_t i = 0; i < layers_; ++i) {
    const std::size_t dilation = std::size_t{1} << i;
    Var z = ad::relu(ad::conv1d_same(h, tape.param(layer_name(i, "dil.w")), tape.param(layer_name(i, "dil.b")), dilation));
    z = ad::add_bias(ad::matmul(z, tape.param(layer_name(i, "pw.w"))), tape.param(layer_name(i, "pw.b")));
    z = ad::dropout(z, dropout_, rng);
    h = ad::add(h, z);
  }
  return ad::add_bias(ad::matmul(h, tape.param(name("out.w"))), tape.param(name("out.b")));
}

void validate(const LMConfig& cfg) {
  if (cfg.input_dim == 0 || cfg.width == 0 || cfg.layers == 0) throw std::invalid_argument("LMConfig: widths must be positive");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) throw std::invalid_argument("LMConfig: dropout must lie in [0, 1)");
}

void validate(const GMConfig& cfg) {
  if (cfg.input_dim == 0 || cfg.width == 0) throw std::invalid_argument("GMConfig: widths must be positive");
  if (cfg.classes < 2) throw std::invalid_argument("GMConfig: class count C must be at least 2");
  if (cfg.topk < 1) throw std::invalid_argument("GMConfig: pooling K must be at least 1");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) throw std::invalid_argument("GMConfig: dropout must lie in [0, 1)");
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

LocalizationModule::LocalizationModule(LMConfig cfg)
    : cfg_(cfg), net_("lm.", cfg.input_dim, cfg.width, cfg.layers, 1, cfg.dropout) {
  validate(cfg_);
}

LocalizationModule::Vars LocalizationModule::forward(ad::Tape& tape, const Var& features, Rng* rng) const {
  Var raw = net_.forward(tape, features, rng);
  Var scores = ad::reshape(raw, {raw.shape()[0]});
  return {scores, ad::sigmoid(scores)};
}

LocalizationOutput LocalizationModule::infer(const ad::ParamStore& store, const Tensor& features) const {
  ad::Tape tape(&store);
  auto vars = forward(tape, tape.constant(features), nullptr);
  LocalizationOutput out;
  out.scores = vars.scores.value();
  out.probabilities = vars.probabilities.value();
  out.predicted_timestamp = argmax(out.scores.data());
  return out;
}

GradingModule::GradingModule(GMConfig cfg, std::string prefix)
    : cfg_(cfg), net_(std::move(prefix), cfg.input_dim, cfg.width, cfg.layers, cfg.logit_count(), cfg.dropout) {
  validate(cfg_);
}

Var GradingModule::frame_logits(ad::Tape& tape, const Var& window, Rng* rng) const {
  return net_.forward(tape, window, rng);
}

}  // namespace stc::nets
