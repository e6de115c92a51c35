#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stc/autodiff/ops.hpp"
#include "stc/autodiff/param_store.hpp"
#include "stc/util/rng.hpp"

namespace stc::nets {

/// Single-stage dilated temporal convolution stack:
///   1x1 projection -> N x [dilated conv(k=3) -> ReLU -> 1x1 -> dropout -> residual add] -> 1x1 head.
/// Layer i uses dilation 2^i. Output length always equals input length.
class TemporalConvNet {
 public:
  TemporalConvNet() = default;
  TemporalConvNet(std::string prefix, std::size_t input_dim, std::size_t width, std::size_t layers,
                  std::size_t output_dim, double dropout);

  /// Adds this network's parameters to store with uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) init.
  void init(ad::ParamStore& store, Rng& rng) const;
  /// Verifies store holds every parameter with the expected shape.
  void check(const ad::ParamStore& store) const;

  /// x: [T x input_dim] -> [T x output_dim]. rng == nullptr selects eval mode.
  ad::Var forward(ad::Tape& tape, const ad::Var& x, Rng* rng) const;

  const std::string& prefix() const noexcept { return prefix_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return output_dim_; }
  std::vector<std::size_t> dilations() const;

 private:
  std::string name(const std::string& suffix) const { return prefix_ + suffix; }
  std::string layer_name(std::size_t i, const char* suffix) const;

  std::string prefix_;
  std::size_t input_dim_ = 0;
  std::size_t width_ = 0;
  std::size_t layers_ = 0;
  std::size_t output_dim_ = 0;
  double dropout_ = 0.0;
};

struct LMConfig {
  std::size_t input_dim = 16;
  std::size_t layers = 5;
  std::size_t width = 64;
  double dropout = 0.0;
};

struct GMConfig {
  std::size_t input_dim = 16;
  std::size_t layers = 2;
  std::size_t width = 64;
  double dropout = 0.2;
  std::size_t classes = 5;
  std::size_t topk = 8;
  /// Adds logit index 0 for the background class.
  bool background = true;

  std::size_t logit_count() const noexcept { return classes + (background ? 1 : 0); }
};

void validate(const LMConfig& cfg);
void validate(const GMConfig& cfg);

struct LocalizationOutput {
  ad::Tensor scores;         // raw frame scores, [T]
  ad::Tensor probabilities;  // sigmoid(scores), [T]
  std::size_t predicted_timestamp = 0;
};

/// Index of the largest value; ties resolve to the smallest index.
std::size_t argmax(std::span<const double> values);

/// Frame-wise relevance scorer. Parameters live under "lm.".
class LocalizationModule {
 public:
  explicit LocalizationModule(LMConfig cfg = {});

  void init(ad::ParamStore& store, Rng& rng) const { net_.init(store, rng); }
  void check(const ad::ParamStore& store) const { net_.check(store); }

  struct Vars {
    ad::Var scores;         // [T]
    ad::Var probabilities;  // [T]
  };
  Vars forward(ad::Tape& tape, const ad::Var& features, Rng* rng) const;
  /// Eval-mode inference on a frozen store.
  LocalizationOutput infer(const ad::ParamStore& store, const ad::Tensor& features) const;

  const LMConfig& config() const noexcept { return cfg_; }

 private:
  LMConfig cfg_;
  TemporalConvNet net_;
};

/// Frame-wise grade classifier applied to one (reweighted) window.
/// Parameters live under the given prefix ("gm." by default).
class GradingModule {
 public:
  explicit GradingModule(GMConfig cfg = {}, std::string prefix = "gm.");

  void init(ad::ParamStore& store, Rng& rng) const { net_.init(store, rng); }
  void check(const ad::ParamStore& store) const { net_.check(store); }

  /// [T_i x D] -> frame logits [T_i x logit_count()].
  ad::Var frame_logits(ad::Tape& tape, const ad::Var& window, Rng* rng) const;

  const GMConfig& config() const noexcept { return cfg_; }

 private:
  GMConfig cfg_;
  TemporalConvNet net_;
};

}  // namespace stc::nets
