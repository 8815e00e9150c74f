#pragma once

#include <cmath>
#include <compare>
#include <cstdlib>
#include <string>

#include "crmot/errors.hpp"

namespace crmot {

// Angular momentum quantum number stored exactly as twice its value, so 3/2 is
// HalfInt{3} and 2 is HalfInt{4}. Keeps every J, F, m comparison and sum exact.
struct HalfInt {
  int twice = 0;

  constexpr HalfInt() = default;
  constexpr explicit HalfInt(int twice_value) : twice(twice_value) {}

  static constexpr HalfInt from_int(int v) { return HalfInt{2 * v}; }

  // Accepts only values within 1e-9 of an integer or half-integer.
  static HalfInt from_double(double v) {
    double t = 2.0 * v;
    double r = std::round(t);
    if (std::abs(t - r) > 1e-9)
      throw ConfigError("not a half-integer: " + std::to_string(v));
    return HalfInt{static_cast<int>(r)};
  }

  constexpr double value() const { return twice / 2.0; }
  constexpr bool is_integer() const { return twice % 2 == 0; }

  constexpr auto operator<=>(const HalfInt&) const = default;
  constexpr HalfInt operator+(HalfInt o) const { return HalfInt{twice + o.twice}; }
  constexpr HalfInt operator-(HalfInt o) const { return HalfInt{twice - o.twice}; }
  constexpr HalfInt operator-() const { return HalfInt{-twice}; }

  std::string str() const {
    if (is_integer()) return std::to_string(twice / 2);
    return std::to_string(twice) + "/2";
  }
};

// Accepts "3", "-2", "7/2", "-7/2", or a decimal like "4.5".
inline HalfInt parse_half_int(const std::string& text) {
  auto bad = [&] { throw ConfigError("not a half-integer: '" + text + "'"); };
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    if (text.substr(slash + 1) != "2") bad();
    const std::string num = text.substr(0, slash);
    char* end = nullptr;
    long n = std::strtol(num.c_str(), &end, 10);
    if (num.empty() || end != num.c_str() + num.size()) bad();
    return HalfInt{static_cast<int>(n)};
  }
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) bad();
  return HalfInt::from_double(v);
}

}  // namespace crmot
