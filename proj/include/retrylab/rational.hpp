// Exact rational arithmetic used by the simulator and the seed machinery.
// Backed by boost::multiprecision so timestamps never lose precision.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace retrylab {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline BigInt rat_num(const Rat& r) { return numerator(r); }
inline BigInt rat_den(const Rat& r) { return denominator(r); }

// Largest integer <= r.
inline BigInt rat_floor(const Rat& r) {
  BigInt q = numerator(r) / denominator(r);
  if (numerator(r) < 0 && q * denominator(r) != numerator(r)) --q;
  return q;
}

// Smallest integer >= r.
inline BigInt rat_ceil(const Rat& r) {
  BigInt q = numerator(r) / denominator(r);
  if (numerator(r) > 0 && q * denominator(r) != numerator(r)) ++q;
  return q;
}

inline double rat_to_double(const Rat& r) { return r.convert_to<double>(); }

inline long long to_ll(const BigInt& v) {
  if (v > (std::numeric_limits<long long>::max)() ||
      v < (std::numeric_limits<long long>::min)()) {
    throw std::overflow_error("rational value does not fit in 64 bits");
  }
  return v.convert_to<long long>();
}

// Parses "num/den" or a plain integer. Used for CLI inputs that must stay
// exact on their way into the simulator.
inline Rat parse_rational(const std::string& text) {
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) {
      return Rat(BigInt(text));
    }
    BigInt num(text.substr(0, slash));
    BigInt den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Rat(num, den);
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed rational: '" + text + "'");
  }
}

inline std::string rat_to_string(const Rat& r) {
  return rat_num(r).str() + "/" + rat_den(r).str();
}

}  // namespace retrylab
