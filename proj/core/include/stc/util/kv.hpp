#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stc::kv {

/// Flat key-value text:
///
///   # comment
///   key = value
///   name = "quoted string"   # trailing comments allowed outside quotes
///
/// Keys are [A-Za-z0-9_.]+; blank lines are ignored; duplicate keys are an
/// error.
struct Entry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

std::vector<Entry> parse(std::string_view text);

// Typed conversions; each throws std::invalid_argument naming the key.
std::int64_t to_int(std::string_view key, std::string_view value);
std::uint64_t to_uint(std::string_view key, std::string_view value);
double to_double(std::string_view key, std::string_view value);
bool to_bool(std::string_view key, std::string_view value);
std::vector<std::int64_t> to_int_list(std::string_view key, std::string_view value);

/// Shortest decimal text that round-trips the double exactly.
std::string format_double(double v);

}  // namespace stc::kv
