#include "stc/autodiff/checkpoint.hpp"

#include "stc/io/binary.hpp"

namespace stc::ad {

namespace {
constexpr char kMagic[4] = {'S', 'T', 'C', 'K'};
}

std::vector<char> encode_checkpoint(const ParamStore& params, const CheckpointHeader& header) {
  io::BinaryWriter w;
  w.bytes(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.u64(header.config_hash);
  w.u64(header.epoch);
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, p] : params) {
    w.string(name);
    w.u8(p.trainable ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(p.value.rank()));
    for (auto e : p.value.shape()) w.u64(e);
    for (double v : p.value.data()) w.f64(v);
  }
  return w.buffer();
}

Checkpoint decode_checkpoint(std::vector<char> bytes) {
  io::BinaryReader r(std::move(bytes));
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw io::FormatError("not a checkpoint file (bad magic)", 0);
  const auto version_at = r.offset();
  const auto version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw io::FormatError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                              std::to_string(kCheckpointVersion) + ")",
                          version_at);
  }
  Checkpoint ck;
  ck.header.config_hash = r.u64("config hash");
  ck.header.epoch = r.u64("epoch");
  const auto count = r.u32("entry count");
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name = r.string("parameter name");
    const bool trainable = r.u8("trainable flag") != 0;
    const auto rank_at = r.offset();
    const auto rank = r.u32("rank");
    if (rank > 3) throw io::FormatError("rank " + std::to_string(rank) + " exceeds 3", rank_at);
    Shape shape;
    std::uint64_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      const auto at = r.offset();
      const auto e = r.u64("extent");
      if (e == 0 || e > (1ULL << 32)) throw io::FormatError("invalid extent", at);
      shape.push_back(static_cast<std::size_t>(e));
      n *= e;
    }
    if (n * 8 > r.remaining()) throw io::FormatError("unexpected end of file while reading values of " + name, r.offset());
    std::vector<double> values(static_cast<std::size_t>(n));
    for (auto& v : values) v = r.f64("value");
    const auto at = r.offset();
    if (ck.params.contains(name)) throw io::FormatError("duplicate parameter '" + name + "'", at);
    ck.params.add(std::move(name), Tensor(std::move(shape), std::move(values)), trainable);
  }
  if (!r.at_end()) throw io::FormatError("trailing bytes after last entry", r.offset());
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params, const CheckpointHeader& header) {
  io::write_file_atomic(path, encode_checkpoint(params, header));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(io::read_file(path)); }

}  // namespace stc::ad
