#include "mirrornoise/kvfile.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "mirrornoise/error.hpp"

namespace mirrornoise {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<KeyValue> parse_key_values(std::string_view text) {
  std::vector<KeyValue> out;
  std::set<std::string> seen;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#' || line.front() == '*') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (key.empty() || value.empty()) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": empty key or value");
    }
    if (!seen.insert(key).second) {
      throw Error(ErrorKind::Parse,
                  "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    out.push_back({std::move(key), std::move(value), line_no});
  }
  return out;
}

}  // namespace mirrornoise
