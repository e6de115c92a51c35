#include <gtest/gtest.h>

#include <filesystem>

#include "stc/autodiff/checkpoint.hpp"
#include "stc/io/binary.hpp"
#include "test_util.hpp"

using namespace stc::ad;

namespace {

ParamStore sample_store(std::uint64_t seed) {
  stc::Rng rng(seed);
  ParamStore s;
  s.add("lm.in.w", testutil::random_tensor({1, 4, 3}, rng));
  s.add("gm.head.b", testutil::random_tensor({6}, rng));
  s.add("gm.head.w", testutil::random_tensor({3, 6}, rng), false);
  return s;
}

void write_u32(std::vector<char>& bytes, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes[at + i] = static_cast<char>((v >> (8 * i)) & 0xFF);
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto store = sample_store(3);
  const auto bytes = encode_checkpoint(store, {0xABCDEF, 17});
  const auto back = decode_checkpoint(bytes);
  EXPECT_EQ(back.header.config_hash, 0xABCDEFu);
  EXPECT_EQ(back.header.epoch, 17u);
  EXPECT_TRUE(back.params.same_values(store));
  EXPECT_FALSE(back.params.at("gm.head.w").trainable);
  EXPECT_EQ(encode_checkpoint(back.params, back.header), bytes);
}

TEST(Checkpoint, LayoutStartsWithMagicAndVersion) {
  const auto bytes = encode_checkpoint(sample_store(1), {});
  ASSERT_GE(bytes.size(), 8u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "STCK");
  stc::io::BinaryReader r({bytes.begin() + 4, bytes.begin() + 8});
  EXPECT_EQ(r.u32("version"), kCheckpointVersion);
}

TEST(Checkpoint, EveryTruncationIsReportedWithOffset) {
  const auto bytes = encode_checkpoint(sample_store(2), {5, 6});
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    std::vector<char> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
    try {
      decode_checkpoint(cut);
      ADD_FAILURE() << "truncated to " << n << " bytes was accepted";
    } catch (const stc::io::FormatError& e) {
      EXPECT_LE(e.offset(), n);
    }
  }
}

TEST(Checkpoint, BadMagicRejected) {
  auto bytes = encode_checkpoint(sample_store(2), {});
  bytes[0] = 'X';
  try {
    decode_checkpoint(bytes);
    FAIL();
  } catch (const stc::io::FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
}

TEST(Checkpoint, VersionMismatchRejected) {
  auto bytes = encode_checkpoint(sample_store(2), {});
  write_u32(bytes, 4, kCheckpointVersion + 1);
  try {
    decode_checkpoint(bytes);
    FAIL();
  } catch (const stc::io::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(Checkpoint, TrailingBytesRejected) {
  auto bytes = encode_checkpoint(sample_store(2), {});
  bytes.push_back('\0');
  EXPECT_THROW(decode_checkpoint(bytes), stc::io::FormatError);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "stc_checkpoint_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "model.stck";
  const auto store = sample_store(9);
  save_checkpoint(path, store, {42, 3});
  const auto back = load_checkpoint(path);
  EXPECT_TRUE(back.params.same_values(store));
  EXPECT_EQ(back.header.epoch, 3u);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(load_checkpoint(path), std::runtime_error);
}
