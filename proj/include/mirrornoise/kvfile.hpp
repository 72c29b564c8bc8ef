#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mirrornoise {

struct KeyValue {
  std::string key;    // lower-cased
  std::string value;  // raw text
  int line = 0;
};

// Flat `key=value` text, one pair per line. Blank lines and lines starting
// with '#' or '*' are skipped. Throws Error(Parse) on a malformed line or a
// repeated key.
std::vector<KeyValue> parse_key_values(std::string_view text);

}  // namespace mirrornoise
