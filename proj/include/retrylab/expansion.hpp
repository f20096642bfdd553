// CAS expansion e(Prl): the stall a retry inherits from serialized ownership
// of the contended line, as the solution of a one-dimensional ODE in the
// retry-loop occupancy. A separable closed form serves as the oracle.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "retrylab/model.hpp"

namespace retrylab {

struct ExpansionCurve {
  double start_occupancy = 0.0;  // Prl0, where expansion begins
  double step = 1.0 / 64.0;
  std::vector<double> values;    // e at start_occupancy + i*step

  double max_occupancy() const {
    return start_occupancy + step * static_cast<double>(values.size() - 1);
  }
};

// e'(Prl) = cc * (cc/2 + e) / (rc + cw + cc + e), e(Prl0) = 0.
// Classical fixed-step RK4 over the grid; a few substeps per grid point keep
// the solution well inside the residual tolerance.
inline ExpansionCurve solve_expansion(const PlatformProfile& profile, double critical_work,
                                      double start_occupancy, double max_occupancy,
                                      double step = 1.0 / 64.0) {
  profile.validate();
  if (!(critical_work >= 0.0)) throw std::invalid_argument("cw must be >= 0");
  if (!(step > 0.0)) throw std::invalid_argument("step must be > 0");
  if (!(start_occupancy >= 0.0) || max_occupancy < start_occupancy) {
    throw std::invalid_argument("need 0 <= Prl0 <= Prl_max");
  }
  const double rc = profile.read_latency;
  const double cc = profile.cas_latency;
  const std::size_t points =
      static_cast<std::size_t>(std::ceil((max_occupancy - start_occupancy) / step)) + 1;

  ExpansionCurve curve;
  curve.start_occupancy = start_occupancy;
  curve.step = step;
  curve.values.assign(points, 0.0);
  if (cc == 0.0) return curve;  // no CAS cost, no serialization

  const auto slope = [&](double e) {
    return cc * (cc / 2.0 + e) / (rc + critical_work + cc + e);
  };
  constexpr int kSubsteps = 4;
  double e = 0.0;
  for (std::size_t i = 1; i < points; ++i) {
    const double h = step / kSubsteps;
    for (int s = 0; s < kSubsteps; ++s) {
      const double k1 = slope(e);
      const double k2 = slope(e + 0.5 * h * k1);
      const double k3 = slope(e + 0.5 * h * k2);
      const double k4 = slope(e + h * k3);
      e += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    curve.values[i] = e;
  }
  return curve;
}

// Separable form of the same ODE:
//   e + (rc + cw + cc/2) * ln((cc/2 + e)/(cc/2)) = cc * (Prl - Prl0).
// Zero exactly on the solution; used to verify the integrator.
inline double implicit_residual(const PlatformProfile& profile, double critical_work,
                                double start_occupancy, double occupancy, double expansion) {
  profile.validate();
  if (profile.cas_latency == 0.0) {
    throw std::invalid_argument("implicit form undefined for cc = 0");
  }
  if (!(expansion >= 0.0)) throw std::invalid_argument("expansion must be >= 0");
  const double rc = profile.read_latency;
  const double cc = profile.cas_latency;
  const double half = cc / 2.0;
  return expansion + (rc + critical_work + half) * std::log((half + expansion) / half) -
         cc * (occupancy - start_occupancy);
}

// Linear interpolation on the grid. Queries below the onset return 0 (the
// pre-onset regime); queries above the grid are an error.
inline double expansion_at(const ExpansionCurve& curve, double occupancy) {
  if (occupancy <= curve.start_occupancy) return 0.0;
  const double offset = (occupancy - curve.start_occupancy) / curve.step;
  const auto idx = static_cast<std::size_t>(offset);
  if (idx + 1 >= curve.values.size()) {
    if (offset <= static_cast<double>(curve.values.size() - 1) + 1e-9) {
      return curve.values.back();
    }
    throw std::out_of_range("occupancy beyond the expansion grid");
  }
  const double t = offset - static_cast<double>(idx);
  return curve.values[idx] * (1.0 - t) + curve.values[idx + 1] * t;
}

}  // namespace retrylab
