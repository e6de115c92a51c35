#include "stc/synth/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "stc/io/binary.hpp"
#include "stc/util/kv.hpp"
#include "stc/util/rng.hpp"

namespace stc::synth {

using ad::Tensor;

void validate(const SynthConfig& cfg) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("SynthConfig: " + msg); };
  if (cfg.videos == 0) fail("video count must be positive");
  if (cfg.classes < 2) fail("class count C must be at least 2");
  if (cfg.dim == 0) fail("feature dimension must be positive");
  if (cfg.length_min == 0 || cfg.length_min > cfg.length_max) fail("invalid T range");
  if (cfg.segment_min == 0 || cfg.segment_min > cfg.segment_max) fail("invalid segment-length range");
  if (cfg.segment_max > cfg.length_min) {
    fail("segment range infeasible for T range: segment_max " + std::to_string(cfg.segment_max) +
         " exceeds length_min " + std::to_string(cfg.length_min));
  }
  if (!(cfg.separation > 0.0)) fail("separation scale must be positive");
  if (!(cfg.noise >= 0.0)) fail("noise level must be non-negative");
  if (!(cfg.scene_scale >= 0.0)) fail("scene scale must be non-negative");
  if (cfg.distractor_min > cfg.distractor_max || cfg.decoy_min > cfg.decoy_max) fail("invalid interval count range");
  if (cfg.distractor_max > 0) {
    if (cfg.distractor_length_min == 0 || cfg.distractor_length_min > cfg.distractor_length_max) {
      fail("invalid distractor length range");
    }
    if (cfg.dim <= cfg.classes) fail("distractors need dim > classes for an activity direction orthogonal to prototypes");
  }
  if (cfg.decoy_max > 0 && (cfg.decoy_length_min == 0 || cfg.decoy_length_min > cfg.decoy_length_max)) {
    fail("invalid decoy length range");
  }
  if (!(cfg.decoy_scale >= 0.0)) fail("decoy scale must be non-negative");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction <= 1.0)) fail("train fraction must lie in (0, 1]");
}

std::vector<const SynthVideo*> Dataset::split(bool train) const {
  std::vector<const SynthVideo*> out;
  for (const auto& v : videos) {
    if (v.train == train) out.push_back(&v);
  }
  return out;
}

namespace {

double normal(Rng& rng) {
  // Box-Muller on our own uniform draws keeps the stream identical across
  // standard library implementations.
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> random_unit(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (auto& x : v) {
      x = normal(rng);
      n2 += x * x;
    }
  } while (n2 < 1e-12);
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& x : v) x *= inv;
  return v;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

Tensor make_prototypes(const SynthConfig& cfg, Rng& rng) {
  constexpr int kMaxAttempts = 10000;
  Tensor protos({cfg.classes, cfg.dim});
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    int attempts = 0;
    while (true) {
      if (++attempts > kMaxAttempts) {
        throw std::invalid_argument("SynthConfig: cannot place " + std::to_string(cfg.classes) +
                                    " prototypes separated by the scale in " + std::to_string(cfg.dim) + " dimensions");
      }
      auto u = random_unit(rng, cfg.dim);
      for (auto& x : u) x = static_cast<double>(static_cast<float>(x * cfg.separation));
      bool ok = true;
      for (std::size_t k = 0; k < c && ok; ++k) ok = distance(u, protos.row(k)) >= cfg.separation;
      if (ok) {
        std::copy(u.begin(), u.end(), protos.row(c).begin());
        break;
      }
    }
  }
  return protos;
}

// Activity directions orthogonal to every prototype, scaled to the separation norm.
std::vector<std::vector<double>> make_activities(const SynthConfig& cfg, const Tensor& protos, Rng& rng) {
  constexpr std::size_t kBank = 4;
  std::vector<std::vector<double>> basis;  // orthonormal basis of the prototype span
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    std::vector<double> v(protos.row(c).begin(), protos.row(c).end());
    for (const auto& b : basis) {
      double d = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) d += v[i] * b[i];
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * b[i];
    }
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n < 1e-9) continue;
    for (auto& x : v) x /= n;
    basis.push_back(std::move(v));
  }
  std::vector<std::vector<double>> out;
  while (out.size() < kBank) {
    auto v = random_unit(rng, cfg.dim);
    for (const auto& b : basis) {
      double d = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) d += v[i] * b[i];
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * b[i];
    }
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n < 1e-6) continue;
    for (auto& x : v) x *= cfg.separation / n;
    out.push_back(std::move(v));
  }
  return out;
}

bool overlaps(std::size_t b, std::size_t e, std::size_t ob, std::size_t oe) { return b < oe && ob < e; }

// Random placement of [b, b+len) disjoint from taken; gives up after a bounded number of tries.
bool place(Rng& rng, std::size_t length, std::size_t len, std::vector<std::pair<std::size_t, std::size_t>>& taken,
           std::size_t& begin) {
  if (len > length) return false;
  for (int attempt = 0; attempt < 50; ++attempt) {
    const auto b = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(length - len)));
    bool clash = false;
    for (auto [ob, oe] : taken) clash = clash || overlaps(b, b + len, ob, oe);
    if (!clash) {
      taken.emplace_back(b, b + len);
      begin = b;
      return true;
    }
  }
  return false;
}

std::size_t draw(Rng& rng, std::size_t lo, std::size_t hi) {
  return static_cast<std::size_t>(uniform_int(rng, static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
}

SynthVideo make_video(const SynthConfig& cfg, const Tensor& protos, const std::vector<std::vector<double>>& activities,
                      std::size_t id, int grade) {
  Rng rng(mix_seed(cfg.seed, id));
  const std::size_t length = draw(rng, cfg.length_min, cfg.length_max);
  const std::size_t dim = cfg.dim;

  SynthVideo v;
  v.id = id;
  v.grade = grade;
  const std::size_t seg_len = draw(rng, cfg.segment_min, cfg.segment_max);
  v.segment_begin = draw(rng, 0, length - seg_len);
  v.segment_end = v.segment_begin + seg_len;
  v.timestamp = draw(rng, v.segment_begin, v.segment_end - 1);

  Tensor x({length, dim});
  for (auto& e : x.data()) e = cfg.noise * normal(rng);

  // Per-video offset inside the prototype span.
  std::vector<double> scene(dim, 0.0);
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    const double z = normal(rng);
    for (std::size_t d = 0; d < dim; ++d) scene[d] += z * protos.at(c, d);
  }
  double sn = 0.0;
  for (double s : scene) sn += s * s;
  sn = std::sqrt(sn);
  const double scene_norm = cfg.scene_scale * cfg.noise;
  for (auto& s : scene) s = sn > 0.0 ? s * scene_norm / sn : 0.0;
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t d = 0; d < dim; ++d) x.at(t, d) += scene[d];
  }

  auto add_vector = [&](std::size_t b, std::size_t e, std::span<const double> vec) {
    for (std::size_t t = b; t < e; ++t) {
      for (std::size_t d = 0; d < dim; ++d) x.at(t, d) += vec[d];
    }
  };
  add_vector(v.segment_begin, v.segment_end, protos.row(static_cast<std::size_t>(grade - 1)));

  std::vector<std::pair<std::size_t, std::size_t>> taken{{v.segment_begin, v.segment_end}};
  const std::size_t n_distractors = cfg.distractor_max > 0 ? draw(rng, cfg.distractor_min, cfg.distractor_max) : 0;
  for (std::size_t k = 0; k < n_distractors; ++k) {
    const std::size_t len = draw(rng, cfg.distractor_length_min, cfg.distractor_length_max);
    const std::size_t which = draw(rng, 0, activities.size() - 1);
    std::size_t b = 0;
    if (!place(rng, length, len, taken, b)) continue;
    add_vector(b, b + len, activities[which]);
    v.planted.push_back({IntervalKind::distractor, 0, b, b + len});
  }
  const std::size_t n_decoys = cfg.decoy_max > 0 ? draw(rng, cfg.decoy_min, cfg.decoy_max) : 0;
  for (std::size_t k = 0; k < n_decoys; ++k) {
    const std::size_t len = draw(rng, cfg.decoy_length_min, cfg.decoy_length_max);
    // Any grade other than the video's own.
    auto other = static_cast<int>(draw(rng, 1, cfg.classes - 1));
    if (other >= grade) ++other;
    std::size_t b = 0;
    if (!place(rng, length, len, taken, b)) continue;
    std::vector<double> decoy(protos.row(static_cast<std::size_t>(other - 1)).begin(),
                              protos.row(static_cast<std::size_t>(other - 1)).end());
    for (double& e : decoy) e *= cfg.decoy_scale;
    add_vector(b, b + len, decoy);
    v.planted.push_back({IntervalKind::decoy, other, b, b + len});
  }
  std::sort(v.planted.begin(), v.planted.end(),
            [](const PlantedInterval& a, const PlantedInterval& b) { return a.begin < b.begin; });

  for (auto& e : x.data()) e = static_cast<double>(static_cast<float>(e));
  v.features = std::move(x);
  return v;
}

}  // namespace

Dataset generate(const SynthConfig& cfg) {
  validate(cfg);
  Rng master(mix_seed(cfg.seed, 0xD47A5E7ULL));
  Dataset ds;
  ds.config = cfg;
  ds.prototypes = make_prototypes(cfg, master);
  std::vector<std::vector<double>> activities;
  if (cfg.distractor_max > 0) activities = make_activities(cfg, ds.prototypes, master);

  std::vector<int> grades(cfg.videos);
  for (std::size_t i = 0; i < cfg.videos; ++i) grades[i] = static_cast<int>(i % cfg.classes) + 1;
  for (std::size_t i = cfg.videos; i-- > 1;) std::swap(grades[i], grades[draw(master, 0, i)]);

  std::vector<std::size_t> order(cfg.videos);
  for (std::size_t i = 0; i < cfg.videos; ++i) order[i] = i;
  for (std::size_t i = cfg.videos; i-- > 1;) std::swap(order[i], order[draw(master, 0, i)]);
  const auto n_train = static_cast<std::size_t>(std::llround(cfg.train_fraction * static_cast<double>(cfg.videos)));
  std::vector<bool> is_train(cfg.videos, false);
  for (std::size_t k = 0; k < n_train && k < cfg.videos; ++k) is_train[order[k]] = true;

  ds.videos.reserve(cfg.videos);
  for (std::size_t i = 0; i < cfg.videos; ++i) {
    ds.videos.push_back(make_video(cfg, ds.prototypes, activities, i, grades[i]));
    ds.videos.back().train = is_train[i];
  }
  return ds;
}

std::string config_echo(const SynthConfig& cfg) {
  std::ostringstream os;
  os << "videos = " << cfg.videos << '\n'
     << "length_min = " << cfg.length_min << '\n'
     << "length_max = " << cfg.length_max << '\n'
     << "dim = " << cfg.dim << '\n'
     << "classes = " << cfg.classes << '\n'
     << "segment_min = " << cfg.segment_min << '\n'
     << "segment_max = " << cfg.segment_max << '\n'
     << "separation = " << kv::format_double(cfg.separation) << '\n'
     << "noise = " << kv::format_double(cfg.noise) << '\n'
     << "distractor_min = " << cfg.distractor_min << '\n'
     << "distractor_max = " << cfg.distractor_max << '\n'
     << "distractor_length_min = " << cfg.distractor_length_min << '\n'
     << "distractor_length_max = " << cfg.distractor_length_max << '\n'
     << "decoy_min = " << cfg.decoy_min << '\n'
     << "decoy_max = " << cfg.decoy_max << '\n'
     << "decoy_length_min = " << cfg.decoy_length_min << '\n'
     << "decoy_length_max = " << cfg.decoy_length_max << '\n'
     << "decoy_scale = " << kv::format_double(cfg.decoy_scale) << '\n'
     << "scene_scale = " << kv::format_double(cfg.scene_scale) << '\n'
     << "seed = " << cfg.seed << '\n'
     << "train_fraction = " << kv::format_double(cfg.train_fraction) << '\n';
  return os.str();
}

bool apply(SynthConfig& cfg, std::string_view key, std::string_view value) {
  const auto& k = key;
  auto u = [&] { return static_cast<std::size_t>(kv::to_uint(key, value)); };
  auto d = [&] { return kv::to_double(key, value); };
  if (k == "videos") cfg.videos = u();
  else if (k == "length_min") cfg.length_min = u();
  else if (k == "length_max") cfg.length_max = u();
  else if (k == "dim") cfg.dim = u();
  else if (k == "classes") cfg.classes = u();
  else if (k == "segment_min") cfg.segment_min = u();
  else if (k == "segment_max") cfg.segment_max = u();
  else if (k == "separation") cfg.separation = d();
  else if (k == "noise") cfg.noise = d();
  else if (k == "distractor_min") cfg.distractor_min = u();
  else if (k == "distractor_max") cfg.distractor_max = u();
  else if (k == "distractor_length_min") cfg.distractor_length_min = u();
  else if (k == "distractor_length_max") cfg.distractor_length_max = u();
  else if (k == "decoy_min") cfg.decoy_min = u();
  else if (k == "decoy_max") cfg.decoy_max = u();
  else if (k == "decoy_length_min") cfg.decoy_length_min = u();
  else if (k == "decoy_length_max") cfg.decoy_length_max = u();
  else if (k == "decoy_scale") cfg.decoy_scale = d();
  else if (k == "scene_scale") cfg.scene_scale = d();
  else if (k == "seed") cfg.seed = kv::to_uint(key, value);
  else if (k == "train_fraction") cfg.train_fraction = d();
  else return false;
  return true;
}

namespace {

SynthConfig parse_echo(const std::string& text) {
  SynthConfig cfg;
  for (const auto& e : kv::parse(text)) {
    if (!apply(cfg, e.key, e.value)) throw std::invalid_argument("unknown config key '" + e.key + "'");
  }
  return cfg;
}

constexpr char kMagic[4] = {'S', 'T', 'C', 'D'};

}  // namespace

std::vector<char> encode_dataset(const Dataset& ds) {
  io::BinaryWriter w;
  w.bytes(kMagic, 4);
  w.u32(kDatasetVersion);
  w.string(config_echo(ds.config));
  w.u64(ds.config.seed);
  w.u32(static_cast<std::uint32_t>(ds.prototypes.dim(0)));
  w.u32(static_cast<std::uint32_t>(ds.prototypes.dim(1)));
  for (double v : ds.prototypes.data()) w.f32(static_cast<float>(v));
  w.u32(static_cast<std::uint32_t>(ds.videos.size()));
  for (const auto& v : ds.videos) {
    w.u32(static_cast<std::uint32_t>(v.features.dim(0)));
    w.u32(static_cast<std::uint32_t>(v.features.dim(1)));
    w.u32(static_cast<std::uint32_t>(v.grade));
    w.u32(static_cast<std::uint32_t>(v.timestamp));
    w.u32(static_cast<std::uint32_t>(v.segment_begin));
    w.u32(static_cast<std::uint32_t>(v.segment_end));
    w.u8(v.train ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(v.planted.size()));
    for (const auto& p : v.planted) {
      w.u8(static_cast<std::uint8_t>(p.kind));
      w.u32(static_cast<std::uint32_t>(p.label));
      w.u32(static_cast<std::uint32_t>(p.begin));
      w.u32(static_cast<std::uint32_t>(p.end));
    }
    for (double x : v.features.data()) w.f32(static_cast<float>(x));
  }
  return w.buffer();
}

Dataset decode_dataset(std::vector<char> bytes) {
  io::BinaryReader r(std::move(bytes));
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw io::FormatError("not a dataset file (bad magic)", 0);
  const auto version_at = r.offset();
  const auto version = r.u32("version");
  if (version != kDatasetVersion) {
    throw io::FormatError("unsupported dataset version " + std::to_string(version) + " (expected " +
                              std::to_string(kDatasetVersion) + ")",
                          version_at);
  }
  Dataset ds;
  const auto echo_at = r.offset();
  const auto echo = r.string("config echo");
  try {
    ds.config = parse_echo(echo);
  } catch (const std::exception& e) {
    throw io::FormatError(std::string("bad config echo: ") + e.what(), echo_at);
  }
  const auto seed_at = r.offset();
  if (r.u64("seed") != ds.config.seed) throw io::FormatError("seed disagrees with config echo", seed_at);
  const auto dims_at = r.offset();
  const auto classes = r.u32("class count");
  const auto dim = r.u32("feature dimension");
  if (classes != ds.config.classes || dim != ds.config.dim || classes == 0 || dim == 0) {
    throw io::FormatError("prototype shape disagrees with config echo", dims_at);
  }
  ds.prototypes = Tensor({classes, dim});
  for (auto& v : ds.prototypes.data()) v = r.f32("prototype");
  const auto count = r.u32("video count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto rec_at = r.offset();
    SynthVideo v;
    v.id = i;
    const auto length = r.u32("T");
    const auto d = r.u32("D");
    v.grade = static_cast<int>(r.u32("grade"));
    v.timestamp = r.u32("timestamp");
    v.segment_begin = r.u32("segment begin");
    v.segment_end = r.u32("segment end");
    v.train = r.u8("split") != 0;
    if (length == 0 || d != dim || v.grade < 1 || static_cast<std::uint32_t>(v.grade) > classes ||
        v.segment_begin > v.timestamp || v.timestamp >= v.segment_end || v.segment_end > length) {
      throw io::FormatError("inconsistent record for video " + std::to_string(i), rec_at);
    }
    const auto n = r.u32("interval count");
    for (std::uint32_t k = 0; k < n; ++k) {
      const auto at = r.offset();
      PlantedInterval p;
      const auto kind = r.u8("interval kind");
      p.label = static_cast<int>(r.u32("interval label"));
      p.begin = r.u32("interval begin");
      p.end = r.u32("interval end");
      if ((kind != 1 && kind != 2) || p.begin >= p.end || p.end > length) {
        throw io::FormatError("invalid planted interval", at);
      }
      p.kind = static_cast<IntervalKind>(kind);
      v.planted.push_back(p);
    }
    const std::uint64_t values = std::uint64_t{length} * d;
    if (values * 4 > r.remaining()) {
      throw io::FormatError("unexpected end of file while reading features of video " + std::to_string(i), r.offset());
    }
    v.features = Tensor({length, d});
    for (auto& x : v.features.data()) x = r.f32("feature");
    ds.videos.push_back(std::move(v));
  }
  if (!r.at_end()) throw io::FormatError("trailing bytes after last record", r.offset());
  return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) { io::write_file_atomic(path, encode_dataset(ds)); }

Dataset load_dataset(const std::filesystem::path& path) { return decode_dataset(io::read_file(path)); }

}  // namespace stc::synth
