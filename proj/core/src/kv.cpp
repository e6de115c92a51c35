#include "stc/util/kv.hpp"

#include <cctype>
#include <charconv>
#include <set>

namespace stc::kv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  }
  return true;
}

[[noreturn]] void bad(std::string_view key, std::string_view value, const char* type) {
  throw std::invalid_argument("value '" + std::string(value) + "' for key '" + std::string(key) + "' is not " + type);
}

}  // namespace

std::vector<Entry> parse(std::string_view text) {
  std::vector<Entry> out;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    auto key = trim(line.substr(0, eq));
    auto rest = trim(line.substr(eq + 1));
    if (!valid_key(key)) throw ParseError("invalid key '" + std::string(key) + "'", line_no);

    std::string value;
    if (!rest.empty() && rest.front() == '"') {
      const auto close = rest.find('"', 1);
      if (close == std::string_view::npos) throw ParseError("unterminated string", line_no);
      value = std::string(rest.substr(1, close - 1));
      auto tail = trim(rest.substr(close + 1));
      if (!tail.empty() && tail.front() != '#') throw ParseError("unexpected text after string", line_no);
    } else {
      const auto hash = rest.find('#');
      value = std::string(trim(rest.substr(0, hash)));
    }
    if (!seen.insert(std::string(key)).second) throw ParseError("duplicate key '" + std::string(key) + "'", line_no);
    out.push_back({std::string(key), std::move(value), line_no});
  }
  return out;
}

std::int64_t to_int(std::string_view key, std::string_view value) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || p != value.data() + value.size()) bad(key, value, "an integer");
  return v;
}

std::uint64_t to_uint(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || p != value.data() + value.size()) bad(key, value, "a non-negative integer");
  return v;
}

double to_double(std::string_view key, std::string_view value) {
  double v = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || p != value.data() + value.size()) bad(key, value, "a number");
  return v;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad(key, value, "a boolean (true/false)");
}

std::vector<std::int64_t> to_int_list(std::string_view key, std::string_view value) {
  std::vector<std::int64_t> out;
  while (true) {
    const auto comma = value.find(',');
    out.push_back(to_int(key, trim(value.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    value = value.substr(comma + 1);
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

}  // namespace stc::kv
