#pragma once

#include <cstdint>
#include <vector>

#include "meshsim/device.hpp"

namespace meshsim {

struct HeaterRef {
  int module = 0;
  int mzi = 0;
  HeaterKind kind = HeaterKind::internal;
};

/// Raw fringe data: intensity at one output while sweeping one heater's
/// drive word. Words are strictly increasing.
struct FringeScan {
  HeaterRef heater;
  int input_mode = 0;
  int monitored_output = 0;
  std::vector<int> drive_words;
  std::vector<double> intensities;
};

/// Result of fitting I(w) = offset + amplitude * cos(alpha * p(w) + phi0)
/// to a fringe scan, p(w) the normalized drive power of word w.
struct FringeFit {
  double alpha = 0.0;        // rad per unit drive power
  double fringe_phi0 = 0.0;  // fringe phase at zero drive, [0, 2*pi)
  double offset = 0.0;       // A
  double amplitude = 0.0;    // B >= 0
  double visibility = 0.0;   // B / A
  double rms_residual = 0.0;
  int n_points = 0;

  /// Curve for commanding this heater's actuated phase. An internal fringe
  /// is I = A - B cos(theta): the pi offset is geometric and the remainder
  /// of the fitted fringe phase is the heater's phase at zero drive. For an
  /// external heater the fringe offset is routing geometry, so the zero-
  /// drive phase is taken as 0.
  TuningCurve inversion(HeaterKind kind) const;
};

/// Sweeps one heater over n_points evenly spaced drive words and records
/// the intensity at the MZI's top output. Light is routed to the MZI by
/// commanding every chip-chain MZI on the probe path to the bar state
/// (through nominal curves); all other MZIs sit at zero drive. An internal
/// scan feeds the MZI's top input; an external scan feeds both inputs
/// coherently and holds the internal phase at quadrature (through
/// internal_fit when given, else the nominal curve). The device is restored
/// to its prior settings afterwards. Throws RoutingError when the MZI's
/// modes fall outside the assembly; ValidationError for n_points outside
/// [8, 256].
FringeScan fringe_scan(Device& dev, const HeaterRef& heater, int n_points,
                       std::uint64_t seed,
                       const FringeFit* internal_fit = nullptr);

/// Sinusoidal least squares: seeds the frequency from the dominant
/// discrete-Fourier component, refines it by a grid/golden-section search
/// on the profiled residual, then polishes all four parameters with damped
/// least squares (at most 200 iterations, step tolerance 1e-10). Throws
/// FitError when the scan is constant, covers less than one fringe
/// (alpha * p-span < 2*pi), or has fewer than 8 points.
FringeFit fit_tuning_curve(const FringeScan& scan);

/// Measured crosstalk coefficient between two internal heaters of one
/// module: calibrates both fringes, parks the victim at fringe quadrature,
/// sweeps the aggressor's commanded phase over [0, pi], and returns the
/// slope of the victim's fringe-inverted phase deviation against the
/// aggressor's realized phase. The device's push-pull state is set for the
/// sweep and restored afterwards.
double measure_crosstalk(Device& dev, int module, int victim_mzi,
                         int aggressor_mzi, bool push_pull,
                         std::uint64_t seed);

/// Per-heater calibration results for a programmed mesh.
struct HeaterCalibration {
  int module = 0;
  int mzi = 0;
  HeaterKind kind = HeaterKind::internal;
  FringeFit fit;
  /// sqrt(r1 r2 (1-r1)(1-r2)) proxy inferred from the fringe visibility
  /// under the equal-coupler assumption: q = v / (2 (1 + v)). Internal
  /// fringes only; NaN for external entries (omitted by the serializers).
  double coupling_product = 0.0;
};

struct CalibrationTable {
  std::vector<HeaterCalibration> entries;  // sorted by (module, mzi, kind)

  const HeaterCalibration* find(int module, int mzi, HeaterKind kind) const;
};

}  // namespace meshsim
