#pragma once

// Helpers shared by the sweep and design spec readers.

#include <json.hpp>

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mirrornoise/devmodel.hpp"
#include "mirrornoise/error.hpp"
#include "mirrornoise/mna.hpp"
#include "mirrornoise/units.hpp"

namespace mirrornoise::detail {

using nlohmann::json;

inline json parse_json_object(std::string_view text, const std::set<std::string>& allowed) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::Parse, "spec must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw Error(ErrorKind::Parse, "unknown spec field '" + k + "'");
  }
  return j;
}

// Numbers may be JSON numbers or strings with engineering suffixes.
inline double number(const json& v, const std::string& what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_eng_or_throw(v.get<std::string>(), what);
  throw Error(ErrorKind::Parse, what + ": expected a number");
}

inline std::string scalar_text(const json& v, const std::string& what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_exact(v.get<double>());
  throw Error(ErrorKind::Parse, what + ": expected a scalar");
}

// Array of numbers, or {start, stop, points, scale: "log"|"lin"}.
inline std::vector<double> value_list(const json& v, const std::string& what) {
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(number(x, what));
    return out;
  }
  if (!v.is_object()) throw Error(ErrorKind::Parse, what + ": expected an array or a range object");
  for (const auto& [k, x] : v.items()) {
    if (k != "start" && k != "stop" && k != "points" && k != "scale") {
      throw Error(ErrorKind::Parse, what + ": unknown range field '" + k + "'");
    }
  }
  if (!v.contains("start") || !v.contains("stop") || !v.contains("points")) {
    throw Error(ErrorKind::Parse, what + ": range needs start, stop and points");
  }
  const double a = number(v["start"], what);
  const double b = number(v["stop"], what);
  if (!v["points"].is_number_integer()) throw Error(ErrorKind::Parse, what + ": points must be an integer");
  const int n = v["points"].get<int>();
  const std::string scale = v.value("scale", std::string("lin"));
  try {
    if (scale == "log") return log_grid(a, b, n);
    if (scale == "lin") return linear_grid(a, b, n);
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, what + ": " + e.what());
  }
  throw Error(ErrorKind::Parse, what + ": scale must be \"log\" or \"lin\"");
}

inline ProcessParams process_from(const json& v) {
  if (!v.is_object()) throw Error(ErrorKind::Parse, "process: expected an object");
  std::string text;
  for (const auto& [k, x] : v.items()) text += k + "=" + scalar_text(x, "process." + k) + "\n";
  return parse_process_params(text);
}

inline bool flag(const json& v, const std::string& what) {
  if (!v.is_boolean()) throw Error(ErrorKind::Parse, what + ": expected true or false");
  return v.get<bool>();
}

}  // namespace mirrornoise::detail
