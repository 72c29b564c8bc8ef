#include "mirrornoise/units.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "mirrornoise/error.hpp"

namespace mirrornoise {

namespace {

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

// Decimal exponent of a scale suffix.
std::optional<int> scale_of(std::string_view suffix) {
  std::string s;
  for (char c : suffix) s.push_back(lower(c));
  if (s.empty()) return 0;
  if (s == "f") return -15;
  if (s == "p") return -12;
  if (s == "n") return -9;
  if (s == "u") return -6;
  if (s == "m") return -3;
  if (s == "k") return 3;
  if (s == "meg") return 6;
  if (s == "g") return 9;
  return std::nullopt;
}

}  // namespace

std::optional<double> parse_eng(std::string_view text) {
  if (text.empty()) return std::nullopt;
  // Mantissa: [+-] digits [. digits] [e [+-] digits]
  std::size_t i = 0;
  if (text[i] == '+' || text[i] == '-') ++i;
  std::size_t digits = 0;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i, ++digits;
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i, ++digits;
  }
  if (digits == 0) return std::nullopt;
  const std::size_t mantissa_end = i;
  long exponent = 0;
  // An 'e' is an exponent only if followed by an optional sign and a digit.
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    std::size_t j = i + 1;
    bool negative = false;
    if (j < text.size() && (text[j] == '+' || text[j] == '-')) negative = text[j++] == '-';
    if (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
        if (exponent < 100000) exponent = exponent * 10 + (text[j] - '0');
        ++j;
      }
      if (negative) exponent = -exponent;
      i = j;
    }
  }
  const auto scale = scale_of(text.substr(i));
  if (!scale) return std::nullopt;
  // Folding the suffix into the decimal exponent keeps "20u" bit-identical
  // to "2e-05" instead of picking up a rounding step from a multiply.
  const std::string literal =
      std::string(text.substr(0, mantissa_end)) + "e" + std::to_string(exponent + *scale);
  char* end = nullptr;
  const double value = std::strtod(literal.c_str(), &end);
  if (end != literal.c_str() + literal.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

double parse_eng_or_throw(std::string_view text, std::string_view what) {
  auto v = parse_eng(text);
  if (!v) {
    throw Error(ErrorKind::Parse,
                "invalid number '" + std::string(text) + "' for " + std::string(what));
  }
  return *v;
}

std::string format_exact(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

}  // namespace mirrornoise
