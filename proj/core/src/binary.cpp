#include "stc/io/binary.hpp"

#include <fstream>
#include <iterator>

namespace stc::io {

void BinaryWriter::bytes(const void* data, std::size_t n) {
  const auto* p = static_cast<const char*>(data);
  buf_.insert(buf_.end(), p, p + n);
}

void BinaryWriter::string(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  bytes(s.data(), s.size());
}

void BinaryReader::bytes(void* out, std::size_t n, const char* what) {
  if (n > data_.size() - pos_) {
    throw FormatError(std::string("unexpected end of file while reading ") + what, pos_);
  }
  std::memcpy(out, data_.data() + pos_, n);
  pos_ += n;
}

std::uint8_t BinaryReader::u8(const char* what) {
  std::uint8_t v = 0;
  bytes(&v, 1, what);
  return v;
}

std::string BinaryReader::string(const char* what, std::uint32_t max_len) {
  const auto at = pos_;
  const auto n = u32(what);
  if (n > max_len) throw FormatError(std::string("implausible length for ") + what, at);
  std::string s(n, '\0');
  bytes(s.data(), n, what);
  return s;
}

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, const std::vector<char>& contents) {
  write_file_atomic(path, std::string_view(contents.data(), contents.size()));
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace stc::io
