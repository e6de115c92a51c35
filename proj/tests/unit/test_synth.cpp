#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "stc/io/binary.hpp"
#include "stc/synth/dataset.hpp"

using namespace stc;
using namespace stc::synth;

namespace {

SynthConfig small_config(std::uint64_t seed = 0) {
  SynthConfig c;
  c.videos = 12;
  c.length_min = 60;
  c.length_max = 90;
  c.dim = 6;
  c.classes = 3;
  c.segment_min = 10;
  c.segment_max = 20;
  c.distractor_length_min = 5;
  c.distractor_length_max = 8;
  c.decoy_length_min = 3;
  c.decoy_length_max = 5;
  c.seed = seed;
  return c;
}

int nearest_prototype(const Dataset& ds, std::span<const double> mean) {
  int best = 1;
  double best_d = INFINITY;
  for (std::size_t c = 0; c < ds.classes(); ++c) {
    double d = 0.0;
    for (std::size_t k = 0; k < ds.dim(); ++k) d += std::pow(mean[k] - ds.prototypes.at(c, k), 2);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c) + 1;
    }
  }
  return best;
}

std::vector<double> frame_mean(const SynthVideo& v, std::size_t begin, std::size_t end) {
  std::vector<double> m(v.features.dim(1), 0.0);
  for (std::size_t t = begin; t < end; ++t)
    for (std::size_t k = 0; k < m.size(); ++k) m[k] += v.features.at(t, k) / static_cast<double>(end - begin);
  return m;
}

struct OracleScores {
  double segment = 0.0;
  double whole = 0.0;
};

OracleScores oracle_accuracy(const Dataset& ds) {
  OracleScores s;
  const auto test = ds.split(false);
  for (const auto* v : test) {
    s.segment += nearest_prototype(ds, frame_mean(*v, v->segment_begin, v->segment_end)) == v->grade;
    s.whole += nearest_prototype(ds, frame_mean(*v, 0, v->length())) == v->grade;
  }
  s.segment /= static_cast<double>(test.size());
  s.whole /= static_cast<double>(test.size());
  return s;
}

void write_u32(std::vector<char>& bytes, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes[at + i] = static_cast<char>((v >> (8 * i)) & 0xFF);
}

}  // namespace

TEST(Synth, SameSeedIsBitIdentical) {
  const auto a = generate(small_config(5));
  const auto b = generate(small_config(5));
  EXPECT_TRUE(a == b);
  EXPECT_EQ(encode_dataset(a), encode_dataset(b));
  EXPECT_FALSE(a == generate(small_config(6)));
}

TEST(Synth, StructuralInvariants) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto cfg = small_config(seed);
    const auto ds = generate(cfg);
    ASSERT_EQ(ds.videos.size(), cfg.videos);
    std::map<int, int> per_grade;
    for (const auto& v : ds.videos) {
      ++per_grade[v.grade];
      EXPECT_GE(v.length(), cfg.length_min);
      EXPECT_LE(v.length(), cfg.length_max);
      EXPECT_EQ(v.features.dim(1), cfg.dim);
      const auto seg = v.segment_end - v.segment_begin;
      EXPECT_GE(seg, cfg.segment_min);
      EXPECT_LE(seg, cfg.segment_max);
      EXPECT_LE(v.segment_end, v.length());
      EXPECT_GE(v.timestamp, v.segment_begin);
      EXPECT_LT(v.timestamp, v.segment_end);
      for (double x : v.features.data()) {
        EXPECT_TRUE(std::isfinite(x));
        EXPECT_EQ(static_cast<double>(static_cast<float>(x)), x);
      }
      for (const auto& p : v.planted) {
        EXPECT_LT(p.begin, p.end);
        EXPECT_LE(p.end, v.length());
        EXPECT_TRUE(p.end <= v.segment_begin || p.begin >= v.segment_end) << "planted interval overlaps segment";
        if (p.kind == IntervalKind::decoy) {
          EXPECT_NE(p.label, v.grade);
        }
      }
    }
    for (int g = 1; g <= static_cast<int>(cfg.classes); ++g) EXPECT_EQ(per_grade[g], 4);
    EXPECT_EQ(ds.split(true).size() + ds.split(false).size(), cfg.videos);
  }
}

TEST(Synth, PrototypesAreSeparated) {
  const auto ds = generate(small_config(3));
  for (std::size_t a = 0; a < ds.classes(); ++a) {
    double norm = 0.0;
    for (std::size_t k = 0; k < ds.dim(); ++k) norm += std::pow(ds.prototypes.at(a, k), 2);
    EXPECT_NEAR(std::sqrt(norm), ds.config.separation, 1e-5);
    for (std::size_t b = a + 1; b < ds.classes(); ++b) {
      double d = 0.0;
      for (std::size_t k = 0; k < ds.dim(); ++k) d += std::pow(ds.prototypes.at(a, k) - ds.prototypes.at(b, k), 2);
      EXPECT_GE(std::sqrt(d), ds.config.separation - 1e-5);
    }
  }
}

TEST(Synth, NoiselessSegmentsEqualPrototype) {
  auto cfg = small_config(1);
  cfg.noise = 0.0;
  cfg.separation = 1.0;
  const auto ds = generate(cfg);
  for (const auto& v : ds.videos) {
    for (std::size_t t = v.segment_begin; t < v.segment_end; ++t)
      for (std::size_t k = 0; k < cfg.dim; ++k)
        ASSERT_EQ(v.features.at(t, k), ds.prototypes.at(static_cast<std::size_t>(v.grade) - 1, k));
  }
  EXPECT_EQ(oracle_accuracy(ds).segment, 1.0);
}

TEST(Synth, NoiselessDecoysCarryScaledPrototype) {
  auto cfg = small_config(4);
  cfg.noise = 0.0;
  cfg.separation = 1.0;
  cfg.decoy_scale = 2.0;
  const auto ds = generate(cfg);
  std::size_t seen = 0;
  for (const auto& v : ds.videos) {
    for (const auto& p : v.planted) {
      if (p.kind != IntervalKind::decoy) continue;
      ++seen;
      for (std::size_t t = p.begin; t < p.end; ++t)
        for (std::size_t k = 0; k < cfg.dim; ++k)
          ASSERT_EQ(v.features.at(t, k), 2.0 * ds.prototypes.at(static_cast<std::size_t>(p.label) - 1, k));
    }
  }
  EXPECT_GT(seen, 0u);
}

TEST(Synth, DefaultConfigRewardsLocalization) {
  // Nearest-prototype on the true segment is near perfect; on whole-video
  // means it is clearly worse, so the task needs localization.
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    SynthConfig cfg;
    cfg.seed = seed;
    const auto s = oracle_accuracy(generate(cfg));
    EXPECT_GE(s.segment, 0.95) << "seed " << seed;
    EXPECT_LE(s.whole, s.segment - 0.2) << "seed " << seed;
  }
}

TEST(Synth, ValidationRejectsBadConfigs) {
  auto bad = small_config();
  bad.segment_max = bad.length_min + 1;
  EXPECT_THROW(validate(bad), std::invalid_argument);
  bad = small_config();
  bad.classes = 1;
  EXPECT_THROW(validate(bad), std::invalid_argument);
  bad = small_config();
  bad.train_fraction = 1.5;
  EXPECT_THROW(validate(bad), std::invalid_argument);
  bad = small_config();
  bad.decoy_scale = -0.5;
  EXPECT_THROW(validate(bad), std::invalid_argument);
  bad = small_config();
  bad.length_min = 100;
  bad.length_max = 50;
  EXPECT_THROW(generate(bad), std::invalid_argument);
}

TEST(Synth, ConfigEchoRoundTrip) {
  auto cfg = small_config(17);
  cfg.noise = 0.75;
  cfg.decoy_scale = 0.3;
  SynthConfig back;
  std::string text = config_echo(cfg);
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = text.substr(pos, nl - pos);
    const auto eq = line.find(" = ");
    ASSERT_NE(eq, std::string::npos);
    EXPECT_TRUE(apply(back, line.substr(0, eq), line.substr(eq + 3)));
    pos = nl + 1;
  }
  EXPECT_TRUE(back == cfg);
  EXPECT_FALSE(apply(back, "colour", "red"));
  EXPECT_THROW(apply(back, "noise", "lots"), std::invalid_argument);
}

TEST(SynthFile, RoundTrip) {
  const auto ds = generate(small_config(4));
  const auto bytes = encode_dataset(ds);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "STCD");
  EXPECT_TRUE(decode_dataset(bytes) == ds);

  const auto path = std::filesystem::temp_directory_path() / "stc_synth_roundtrip.stcd";
  save_dataset(path, ds);
  EXPECT_TRUE(load_dataset(path) == ds);
  std::filesystem::remove(path);
}

TEST(SynthFile, TruncationNamesOffset) {
  const auto bytes = encode_dataset(generate(small_config(4)));
  for (std::size_t n : {std::size_t{0}, std::size_t{3}, std::size_t{7}, std::size_t{40}, bytes.size() / 2, bytes.size() - 1}) {
    try {
      decode_dataset({bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n)});
      ADD_FAILURE() << "accepted " << n << " bytes";
    } catch (const io::FormatError& e) {
      EXPECT_LE(e.offset(), n);
      EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
    }
  }
}

TEST(SynthFile, VersionMismatchAndTrailingBytes) {
  auto bytes = encode_dataset(generate(small_config(4)));
  auto wrong = bytes;
  write_u32(wrong, 4, kDatasetVersion + 1);
  EXPECT_THROW(decode_dataset(wrong), io::FormatError);
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_THROW(decode_dataset(longer), io::FormatError);
  auto magic = bytes;
  magic[1] = 'X';
  EXPECT_THROW(decode_dataset(magic), io::FormatError);
}
