#include "speechstd/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "speechstd/error.hpp"
#include "speechstd/io.hpp"

namespace speechstd {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_key(std::string_view k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
}

// Strips a trailing comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

std::string unquote(std::string_view v, std::size_t line_no) {
  if (v.size() < 2 || v.back() != '"') {
    throw Error(ErrorKind::ConfigSyntax, "line " + std::to_string(line_no) + ": unterminated string");
  }
  std::string out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] == '\\' && i + 2 < v.size()) {
      const char e = v[++i];
      out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
    } else {
      out += v[i];
    }
  }
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  KeyValueConfig cfg;
  std::string section;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string_view line = trim(strip_comment(text.substr(start, end - start)));
    start = end + 1;
    if (!line.empty()) {
      if (line.front() == '[') {
        if (line.back() != ']' || !valid_key(trim(line.substr(1, line.size() - 2)))) {
          throw Error(ErrorKind::ConfigSyntax, "line " + std::to_string(line_no) + ": bad section header");
        }
        section = std::string(trim(line.substr(1, line.size() - 2)));
      } else {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
          throw Error(ErrorKind::ConfigSyntax, "line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view raw = trim(line.substr(eq + 1));
        if (!valid_key(key) || raw.empty()) {
          throw Error(ErrorKind::ConfigSyntax, "line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
        cfg.values_[full] = raw.front() == '"' ? unquote(raw, line_no) : std::string(raw);
      }
    }
    if (end == text.size()) break;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::optional<std::string> KeyValueConfig::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<long long> KeyValueConfig::get_int(const std::string& key) const {
  auto s = get_string(key);
  if (!s) return std::nullopt;
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
  if (ec != std::errc() || ptr != s->data() + s->size()) {
    throw Error(ErrorKind::ConfigSyntax, key + ": expected an integer, got '" + *s + "'");
  }
  return v;
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
  auto s = get_string(key);
  if (!s) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(*s, &used);
    if (used == s->size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::ConfigSyntax, key + ": expected a number, got '" + *s + "'");
}

std::optional<bool> KeyValueConfig::get_bool(const std::string& key) const {
  auto s = get_string(key);
  if (!s) return std::nullopt;
  if (*s == "true") return true;
  if (*s == "false") return false;
  throw Error(ErrorKind::ConfigSyntax, key + ": expected true or false, got '" + *s + "'");
}

}  // namespace speechstd
