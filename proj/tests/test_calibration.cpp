#include <doctest.h>

#include <cmath>
#include <vector>

#include "meshsim/calibration.hpp"
#include "meshsim/device.hpp"
#include "meshsim/imperfections.hpp"
#include "meshsim/linalg.hpp"

using namespace meshsim;

namespace {

Device make_device_for(const ImperfectionSpec& spec, double noise_sigma,
                       bool quantized = true) {
  return Device(sample_hardware(spec, AssemblyLayout{}, 42), spec,
                DriveMode{quantized, true}, noise_sigma);
}

/// Internal-fringe shape for equal couplers of ratio r (lossless scale):
/// I = A - B cos(theta) with A = r^2 + (1-r)^2 and B = 2 r (1-r).
struct FringeShape {
  double offset;
  double amplitude;
  double visibility;
};

FringeShape internal_fringe_shape(double r) {
  const double a = r * r + (1.0 - r) * (1.0 - r);
  const double b = 2.0 * r * (1.0 - r);
  return {a, b, b / a};
}

}  // namespace

TEST_CASE("internal fringe of deterministic hardware fits the design curve") {
  // Continuous drive: the probe-path bar states are then exact, so the
  // fringe matches the closed form to fit precision.
  Device dev = make_device_for(ImperfectionSpec::nominal(), 0.0, false);
  const HeaterRef heater{1, 4, HeaterKind::internal};
  const double before = dev.realized_phase(1, 4, HeaterKind::internal);

  const FringeScan scan = fringe_scan(dev, heater, 192, 5);
  CHECK(scan.drive_words.size() == 192);
  CHECK(scan.intensities.size() == 192);
  for (std::size_t i = 1; i < scan.drive_words.size(); ++i) {
    CHECK(scan.drive_words[i] > scan.drive_words[i - 1]);
  }
  CHECK(scan.drive_words.front() == 0);
  CHECK(scan.drive_words.back() == 255);
  // The scan restores the device to how it found it.
  CHECK(dev.realized_phase(1, 4, HeaterKind::internal) == before);

  const FringeFit fit = fit_tuning_curve(scan);
  CHECK(fit.n_points == 192);
  CHECK(std::abs(fit.alpha / (2.7 * kPi) - 1.0) < 1e-6);
  // The fringe minimum sits at zero internal phase, so the fitted cosine
  // carries a geometric pi offset.
  CHECK(std::abs(wrap_pm_pi(fit.fringe_phi0 - kPi)) < 1e-6);
  const FringeShape want = internal_fringe_shape(0.57);
  CHECK(fit.visibility == doctest::Approx(want.visibility).epsilon(1e-7));
  CHECK(fit.offset > 0.0);
  CHECK(fit.rms_residual < 1e-8);

  // Visibility pins the coupling product r(1-r) for lossless equal couplers.
  const double q = fit.visibility / (2.0 * (1.0 + fit.visibility));
  CHECK(q == doctest::Approx(0.57 * 0.43).epsilon(1e-7));

  // The inversion curve strips the geometric pi and keeps the fitted span.
  const TuningCurve inv = fit.inversion(HeaterKind::internal);
  CHECK(inv.alpha == fit.alpha);
  CHECK(std::abs(inv.phi0) < 1e-6);
}

TEST_CASE("ideal hardware shows a full-visibility fringe") {
  Device dev = make_device_for(ImperfectionSpec::ideal(), 0.0);
  const FringeScan scan = fringe_scan(dev, {0, 4, HeaterKind::internal}, 128, 9);
  const FringeFit fit = fit_tuning_curve(scan);
  CHECK(fit.visibility == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(fit.alpha / (2.7 * kPi) - 1.0) < 1e-6);
  const double q = fit.visibility / (2.0 * (1.0 + fit.visibility));
  CHECK(q == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("external fringe calibrates against the internal quadrature") {
  Device dev = make_device_for(ImperfectionSpec::nominal(), 0.0);
  const FringeFit internal_fit =
      fit_tuning_curve(fringe_scan(dev, {1, 4, HeaterKind::internal}, 160, 11));
  const FringeScan scan = fringe_scan(dev, {1, 4, HeaterKind::external}, 160,
                                      12, &internal_fit);
  const FringeFit fit = fit_tuning_curve(scan);
  CHECK(std::abs(fit.alpha / (2.7 * kPi) - 1.0) < 1e-5);
  // Balanced coherent inputs at internal quadrature give a deep fringe.
  CHECK(fit.visibility > 0.99);
  // External zero-drive phase is defined as zero by convention.
  CHECK(fit.inversion(HeaterKind::external).phi0 == 0.0);
}

TEST_CASE("fringe fit tolerates measurement noise") {
  Device dev = make_device_for(ImperfectionSpec::nominal(), 0.01);
  const FringeFit fit = fit_tuning_curve(
      fringe_scan(dev, {0, 4, HeaterKind::internal}, 256, 21));
  CHECK(std::abs(fit.alpha / (2.7 * kPi) - 1.0) < 0.005);
  // Residuals sit at the injected multiplicative noise scale.
  CHECK(fit.rms_residual > 1e-5);
  CHECK(fit.rms_residual < 0.05 * (fit.offset + fit.amplitude));
}

TEST_CASE("fringe scans on typical hardware fit every usable heater") {
  Device dev = make_device_for(ImperfectionSpec::typical(), 0.0);
  for (int mzi : {0, 4, 9}) {
    const FringeFit fit = fit_tuning_curve(
        fringe_scan(dev, {0, mzi, HeaterKind::internal}, 128, 30 + mzi));
    // Typical tuning ranges are drawn near 2.7 pi with 0.2 pi spread.
    CHECK(fit.alpha > 1.8 * kPi);
    CHECK(fit.alpha < 3.6 * kPi);
    CHECK(fit.visibility > 0.5);
  }
}

TEST_CASE("fringe_scan validates its request") {
  Device dev = make_device_for(ImperfectionSpec::nominal(), 0.0);
  CHECK_THROWS_AS(fringe_scan(dev, {0, 4, HeaterKind::internal}, 7, 1),
                  ValidationError);
  CHECK_THROWS_AS(fringe_scan(dev, {0, 4, HeaterKind::internal}, 257, 1),
                  ValidationError);
  CHECK_THROWS_AS(fringe_scan(dev, {3, 0, HeaterKind::internal}, 64, 1),
                  IndexError);
  CHECK_THROWS_AS(fringe_scan(dev, {-1, 0, HeaterKind::internal}, 64, 1),
                  IndexError);
  CHECK_THROWS_AS(fringe_scan(dev, {0, 10, HeaterKind::internal}, 64, 1),
                  IndexError);
  // Module 1 has parity 1, so its last MZI would need a 21st mode.
  CHECK_THROWS_AS(fringe_scan(dev, {1, 9, HeaterKind::internal}, 64, 1),
                  RoutingError);
}

TEST_CASE("fit_tuning_curve rejects degenerate scans") {
  FringeScan scan;
  scan.drive_words = {0, 30, 60, 90, 120, 150, 180, 210, 240};
  scan.intensities.assign(9, 0.5);
  CHECK_THROWS_AS(fit_tuning_curve(scan), FitError);  // constant

  scan.intensities.assign(4, 0.5);
  CHECK_THROWS_AS(fit_tuning_curve(scan), ValidationError);  // size mismatch

  FringeScan few;
  few.drive_words = {0, 40, 80, 120, 160, 200, 240};
  few.intensities = {0.1, 0.5, 0.9, 0.5, 0.1, 0.5, 0.9};
  CHECK_THROWS_AS(fit_tuning_curve(few), FitError);  // under 8 points

  FringeScan unsorted;
  unsorted.drive_words = {0, 30, 30, 90, 120, 150, 180, 210, 240};
  unsorted.intensities.assign(9, 0.0);
  for (std::size_t i = 0; i < 9; ++i) {
    unsorted.intensities[i] = 0.5 + 0.4 * std::cos(0.05 * unsorted.drive_words[i]);
  }
  CHECK_THROWS_AS(fit_tuning_curve(unsorted), ValidationError);
}

TEST_CASE("fit_tuning_curve rejects a scan covering under one fringe") {
  // Synthetic quarter-turn fringe: alpha = pi over the full word span.
  FringeScan scan;
  for (int w = 0; w <= 255; w += 4) {
    const double p = (w - 128) / 255.0;
    scan.drive_words.push_back(w);
    scan.intensities.push_back(0.5 + 0.2 * std::cos(kPi * p + 0.3));
  }
  CHECK_THROWS_AS(fit_tuning_curve(scan), FitError);
}

TEST_CASE("crosstalk measurement recovers the injected coefficients") {
  Device dev = make_device_for(ImperfectionSpec::nominal(), 0.0);
  const double before = dev.realized_phase(0, 4, HeaterKind::internal);

  const double neighbor = measure_crosstalk(dev, 0, 4, 5, true, 13);
  CHECK(std::abs(neighbor - 0.01) < 1e-4);
  CHECK(dev.realized_phase(0, 4, HeaterKind::internal) == before);

  const double next_nearest = measure_crosstalk(dev, 0, 4, 6, true, 13);
  CHECK(std::abs(next_nearest - 0.007) < 1e-4);

  // Without push-pull the thermal pickup doubles.
  const double single = measure_crosstalk(dev, 0, 4, 5, false, 13);
  CHECK(single / neighbor == doctest::Approx(2.0).epsilon(1e-2));

  CHECK_THROWS_AS(measure_crosstalk(dev, 0, 4, 4, true, 13), ValidationError);
}

TEST_CASE("crosstalk measurement survives measurement noise") {
  Device dev = make_device_for(ImperfectionSpec::nominal(), 0.005);
  const double neighbor = measure_crosstalk(dev, 0, 4, 5, true, 17);
  CHECK(std::abs(neighbor - 0.01) < 0.0015);
}
