#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace mirrornoise {

inline constexpr double kBoltzmann = 1.380649e-23;       // J/K
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kPi = 3.14159265358979323846;

inline double thermal_voltage(double temperature) {
  return kBoltzmann * temperature / kElementaryCharge;
}

// 4kT in J.
inline double four_kt(double temperature) { return 4.0 * kBoltzmann * temperature; }

// Parses a SPICE number: decimal/exponent mantissa followed by an optional
// scale suffix f,p,n,u,m,k,meg,g (case-insensitive). Nothing may follow
// the suffix. Returns nullopt on any malformed input.
std::optional<double> parse_eng(std::string_view text);

// Like parse_eng but throws Error(Parse) naming the offending text.
double parse_eng_or_throw(std::string_view text, std::string_view what);

// Shortest decimal text that reads back to exactly the same double.
std::string format_exact(double value);

}  // namespace mirrornoise
