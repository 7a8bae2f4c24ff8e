#include "meshsim/drive.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "meshsim/linalg.hpp"

namespace meshsim {

namespace {

void check_curve(const TuningCurve& c) {
  if (c.levels < 2) {
    throw ValidationError("tuning curve: levels must be >= 2");
  }
  if (!(c.alpha > 0.0) || !std::isfinite(c.alpha)) {
    throw ValidationError("tuning curve: range must be positive and finite");
  }
}

}  // namespace

double drive_power(int word, int levels) {
  return static_cast<double>(word - levels / 2) /
         static_cast<double>(levels - 1);
}

double curve_phase(const TuningCurve& curve, int word) {
  check_curve(curve);
  if (word < 0 || word >= curve.levels) {
    throw IndexError("curve_phase: drive word " + std::to_string(word) +
                     " out of range");
  }
  return curve.phi0 + curve.alpha * drive_power(word, curve.levels);
}

DriveResult quantize_drive(double target_phase, const TuningCurve& curve) {
  check_curve(curve);
  if (!std::isfinite(target_phase)) {
    throw ValidationError("quantize_drive: non-finite target phase");
  }
  const int anchor = curve.levels / 2;
  const double step = curve.alpha / static_cast<double>(curve.levels - 1);
  const double t = target_phase - curve.phi0;
  const double lo = -static_cast<double>(anchor) * step;
  const double hi = static_cast<double>(curve.levels - 1 - anchor) * step;
  // Candidate 2*pi wraps whose value can round into the span; the half-step
  // slack lets targets just outside the span round onto the edge word while
  // still meeting the |realized - target| <= step/2 bound.
  const double kmin = std::ceil((lo - 0.5 * step - t) / kTwoPi);
  const double kmax = std::floor((hi + 0.5 * step - t) / kTwoPi);
  bool found = false;
  int best_word = 0;
  double best_err = 0.0;
  for (double k = kmin; k <= kmax; k += 1.0) {
    const double x = t + kTwoPi * k;
    const long w = std::clamp(std::lround(x / step) + anchor, 0L,
                              static_cast<long>(curve.levels - 1));
    const double err =
        std::abs(x - static_cast<double>(w - anchor) * step);
    if (!found || err < best_err) {
      found = true;
      best_err = err;
      best_word = static_cast<int>(w);
    }
  }
  if (!found) {
    throw UnreachablePhaseError(
        "quantize_drive: target phase " + std::to_string(target_phase) +
        " rad unreachable within span " + std::to_string(curve.alpha) +
        " rad");
  }
  return {best_word,
          curve.phi0 + static_cast<double>(best_word - anchor) * step};
}

double continuous_phase(double target_phase, const TuningCurve& curve) {
  check_curve(curve);
  if (!std::isfinite(target_phase)) {
    throw ValidationError("continuous_phase: non-finite target phase");
  }
  const int anchor = curve.levels / 2;
  const double step = curve.alpha / static_cast<double>(curve.levels - 1);
  const double t = target_phase - curve.phi0;
  const double lo = -static_cast<double>(anchor) * step;
  const double hi = static_cast<double>(curve.levels - 1 - anchor) * step;
  const double kmin = std::ceil((lo - t) / kTwoPi);
  const double kmax = std::floor((hi - t) / kTwoPi);
  if (kmin > kmax) {
    throw UnreachablePhaseError(
        "continuous_phase: target phase " + std::to_string(target_phase) +
        " rad unreachable within span " + std::to_string(curve.alpha) +
        " rad");
  }
  // Of the admissible wraps pick the one actuating least |phase|.
  double best_x = 0.0;
  bool found = false;
  for (double k = kmin; k <= kmax; k += 1.0) {
    const double x = t + kTwoPi * k;
    if (!found || std::abs(x) < std::abs(best_x)) {
      found = true;
      best_x = x;
    }
  }
  return curve.phi0 + best_x;
}

}  // namespace meshsim
