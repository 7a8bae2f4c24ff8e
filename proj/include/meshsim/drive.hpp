#pragma once

#include "meshsim/errors.hpp"

namespace meshsim {

inline constexpr int kDriveLevels = 256;  // 8-bit PWM drive
inline constexpr int kZeroWord = kDriveLevels / 2;

/// Linear phase response of one heater to its normalized push-pull drive
/// power p: phase(word) = phi0 + alpha * p(word), with
/// p(word) = (word - levels/2) / (levels - 1). Word levels/2 actuates
/// exactly zero phase. `range` is the total actuated span (= alpha, kept as
/// an explicit field because it is the quantity quoted per heater).
struct TuningCurve {
  double alpha = 2.7 * 3.14159265358979323846;
  double phi0 = 0.0;
  double range = 2.7 * 3.14159265358979323846;
  int levels = kDriveLevels;
};

/// Normalized drive power of a word, in [-1/2 - eps, 1/2 + eps].
double drive_power(int word, int levels = kDriveLevels);

/// Phase actuated at a drive word.
double curve_phase(const TuningCurve& curve, int word);

struct DriveResult {
  int word = kZeroWord;
  double realized_phase = 0.0;
};

/// Nearest representable drive word for a target phase, allowing 2*pi
/// wrapping. Guarantees |realized - wrapped target| <= step/2 with
/// step = alpha/(levels-1). Throws UnreachablePhaseError when the span is
/// below 2*pi and no wrap of the target falls inside it.
DriveResult quantize_drive(double target_phase, const TuningCurve& curve);

/// Continuous (unquantized) drive: returns the exact phase the heater
/// realizes for the target, wrapped by multiples of 2*pi into the curve
/// span. Same reachability rule as quantize_drive.
double continuous_phase(double target_phase, const TuningCurve& curve);

}  // namespace meshsim
