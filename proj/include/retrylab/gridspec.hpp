// Grid syntax "start:end:step", inclusive of both endpoints when the step
// divides the range.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace retrylab {

inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  const auto c1 = text.find(':');
  try {
    if (c1 == std::string::npos) {
      out.push_back(std::stod(text));
      return out;
    }
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos) throw std::invalid_argument("grid");
    const double start = std::stod(text.substr(0, c1));
    const double end = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = std::stod(text.substr(c2 + 1));
    if (!(step > 0.0) || end < start) throw std::invalid_argument("grid");
    for (long i = 0;; ++i) {
      const double x = start + step * static_cast<double>(i);
      if (x > end + step * 1e-9) break;
      out.push_back(std::min(x, end));
    }
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed grid '" + text + "', expected start:end:step");
  }
}

}  // namespace retrylab
