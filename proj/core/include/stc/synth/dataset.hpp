#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stc/autodiff/tensor.hpp"

namespace stc::synth {

struct SynthConfig {
  std::size_t videos = 200;
  std::size_t length_min = 300;  // frames (1 frame = 1 s)
  std::size_t length_max = 900;
  std::size_t dim = 16;
  std::size_t classes = 5;
  std::size_t segment_min = 40;
  std::size_t segment_max = 120;
  /// Norm of every class prototype; prototypes are pairwise at least this far apart.
  double separation = 4.0;
  /// Per-entry standard deviation of background noise.
  double noise = 1.0;
  /// Class-free activity segments (orthogonal to every prototype).
  std::size_t distractor_min = 0;
  std::size_t distractor_max = 2;
  std::size_t distractor_length_min = 20;
  std::size_t distractor_length_max = 60;
  /// Short bursts carrying another grade's prototype, outside the informative segment.
  std::size_t decoy_min = 1;
  std::size_t decoy_max = 3;
  std::size_t decoy_length_min = 8;
  std::size_t decoy_length_max = 16;
  /// Decoy prototype multiplier relative to the true segment.
  double decoy_scale = 1.5;
  /// Norm of a per-video constant offset inside the prototype span, in units of `noise`.
  double scene_scale = 1.8;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;

  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

/// Rejects configurations that cannot be generated.
void validate(const SynthConfig& cfg);

enum class IntervalKind : std::uint8_t { distractor = 1, decoy = 2 };

struct PlantedInterval {
  IntervalKind kind = IntervalKind::distractor;
  int label = 0;  // decoy grade; 0 for distractors
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive

  friend bool operator==(const PlantedInterval&, const PlantedInterval&) = default;
};

struct SynthVideo {
  std::size_t id = 0;
  ad::Tensor features;  // [T x D], every value representable as f32
  int grade = 1;        // 1..C
  std::size_t timestamp = 0;
  std::size_t segment_begin = 0;
  std::size_t segment_end = 0;  // exclusive
  std::vector<PlantedInterval> planted;
  bool train = true;

  std::size_t length() const { return features.dim(0); }
  friend bool operator==(const SynthVideo&, const SynthVideo&) = default;
};

struct Dataset {
  SynthConfig config;
  ad::Tensor prototypes;  // [C x D]
  std::vector<SynthVideo> videos;

  std::vector<const SynthVideo*> split(bool train) const;
  std::size_t classes() const { return config.classes; }
  std::size_t dim() const { return config.dim; }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

Dataset generate(const SynthConfig& cfg);

/// Dataset file, little-endian:
///   magic "STCD", u32 version, config echo (u32 len + "key = value" lines),
///   u64 seed, u32 C, u32 D, f32 prototypes[C*D], u32 N, then N records of
///   { u32 T, u32 D, u32 c, u32 t, u32 s_gt, u32 e_gt, u8 split (1 = train),
///     u32 n, n x { u8 kind, u32 label, u32 begin, u32 end },
///     f32 features[T*D] row-major }.
inline constexpr std::uint32_t kDatasetVersion = 1;

std::vector<char> encode_dataset(const Dataset& ds);
/// Throws io::FormatError naming the byte offset on malformed input.
Dataset decode_dataset(std::vector<char> bytes);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

/// Every setting in "key = value" form, in a fixed order.
std::string config_echo(const SynthConfig& cfg);
/// Applies one setting by its echo key. Returns false for unknown keys;
/// throws std::invalid_argument for malformed values.
bool apply(SynthConfig& cfg, std::string_view key, std::string_view value);

}  // namespace stc::synth
