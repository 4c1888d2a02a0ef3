#include "swarmflow/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "swarmflow/errors.hpp"

namespace swarmflow {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(std::string_view k) {
  if (k.empty() || k.front() == '.' || k.back() == '.' || k.find("..") != std::string_view::npos) return false;
  if (k.find('.') == std::string_view::npos) return false;
  for (char ch : k) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                    ch == '_' || ch == '.';
    if (!ok) return false;
  }
  return true;
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double x = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, x);
  if (ec != std::errc() || p != end) return std::nullopt;
  return x;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, p);
}

void Config::set(const std::string& key, std::string value) {
  if (!valid_key(key)) throw ConfigError("invalid key", 0, key);
  values_[key] = std::move(value);
  lines_.erase(key);
}

void Config::set(const std::string& key, double value) { set(key, format_double(value)); }
void Config::set(const std::string& key, int value) { set(key, std::to_string(value)); }
void Config::set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

int Config::line_of(const std::string& key) const {
  auto it = lines_.find(key);
  return it == lines_.end() ? 0 : it->second;
}

std::string Config::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing key", 0, key);
  return it->second;
}

double Config::get_double(const std::string& key) const {
  const auto x = to_double(get_string(key));
  if (!x) throw ConfigError("expected a number, got '" + get_string(key) + "'", line_of(key), key);
  return *x;
}

int Config::get_int(const std::string& key) const {
  const std::string s = std::string(trim(get_string(key)));
  int x = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw ConfigError("expected an integer, got '" + s + "'", line_of(key), key);
  return x;
}

bool Config::get_bool(const std::string& key) const {
  const std::string s = std::string(trim(get_string(key)));
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("expected a boolean, got '" + s + "'", line_of(key), key);
}

std::vector<double> Config::get_list(const std::string& key) const {
  const std::string s = get_string(key);
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto item = std::string_view(s).substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto x = to_double(item);
    if (!x) throw ConfigError("expected a list of numbers, got '" + s + "'", line_of(key), key);
    out.push_back(*x);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}
double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}
int Config::get_int(const std::string& key, int fallback) const { return has(key) ? get_int(key) : fallback; }
bool Config::get_bool(const std::string& key, bool fallback) const {
  return has(key) ? get_bool(key) : fallback;
}

Config parse_config(std::string_view text) {
  Config c;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'section.key = value'", line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (!valid_key(key)) throw ConfigError("malformed key", line_no, key);
    if (value.empty()) throw ConfigError("empty value", line_no, key);
    if (c.values_.count(key)) throw ConfigError("duplicate key (first on line " + std::to_string(c.lines_[key]) + ")", line_no, key);
    c.values_[key] = value;
    c.lines_[key] = line_no;
  }
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const Config& c) {
  std::string out;
  std::string section;
  for (const auto& [k, v] : c.entries()) {
    const std::string s = k.substr(0, k.find('.'));
    if (!out.empty() && s != section) out += '\n';
    section = s;
    out += k + " = " + v + '\n';
  }
  return out;
}

std::uint64_t config_hash(const Config& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex_hash(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[i] = digits[h & 0xf];
  return s;
}

}  // namespace swarmflow
