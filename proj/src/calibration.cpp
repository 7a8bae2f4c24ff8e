#include "meshsim/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <tuple>

#include "meshsim/rng.hpp"

namespace meshsim {

TuningCurve FringeFit::inversion(HeaterKind kind) const {
  const double phi0 =
      kind == HeaterKind::internal ? wrap_pm_pi(fringe_phi0 - kPi) : 0.0;
  return TuningCurve{alpha, phi0, alpha, kDriveLevels};
}

const HeaterCalibration* CalibrationTable::find(int module, int mzi,
                                                HeaterKind kind) const {
  for (const HeaterCalibration& e : entries) {
    if (e.module == module && e.mzi == mzi && e.kind == kind) return &e;
  }
  return nullptr;
}

namespace {

void check_heater(const Device& dev, const HeaterRef& h) {
  if (h.module < 0 || h.module >= dev.n_modules()) {
    throw IndexError("fringe_scan: module " + std::to_string(h.module) +
                     " out of range");
  }
  const ChipModule& mod = dev.assembly().modules[h.module];
  if (h.mzi < 0 || h.mzi >= mod.width) {
    throw IndexError("fringe_scan: MZI " + std::to_string(h.mzi) +
                     " out of range");
  }
  if (!mod.usable(h.mzi, dev.n_modes())) {
    throw RoutingError("fringe_scan: MZI " + std::to_string(h.mzi) +
                       " of module " + std::to_string(h.module) +
                       " has no optical path (modes out of range)");
  }
}

/// Commands the bar state onto every chip-chain MZI that carries the probe
/// modes to and from the target MZI. `modes_in` are the fiber input modes
/// that must arrive intact at the target module; the top output mode is
/// always routed onward to the output facet. Everything else is left at
/// zero drive (the caller parks first).
void route_probe(Device& dev, const HeaterRef& h,
                 const std::vector<int>& modes_in, int monitored) {
  for (int m = 0; m < dev.n_modules(); ++m) {
    if (m == h.module) continue;
    const ChipModule& mod = dev.assembly().modules[m];
    const auto bar_mode = [&](int mode) {
      const int k = mod.mzi_on_mode(mode, dev.n_modes());
      if (k >= 0) dev.set_phase(m, k, HeaterKind::internal, kPi);
    };
    if (m < h.module) {
      for (int mode : modes_in) bar_mode(mode);
    } else {
      bar_mode(monitored);
    }
  }
}

}  // namespace

FringeScan fringe_scan(Device& dev, const HeaterRef& heater, int n_points,
                       std::uint64_t seed, const FringeFit* internal_fit) {
  check_heater(dev, heater);
  if (n_points < 8 || n_points > kDriveLevels) {
    throw ValidationError("fringe_scan: n_points must lie in [8, 256]");
  }
  const int top = dev.assembly().modules[heater.module].top_mode(heater.mzi);
  SettingsGuard guard(dev);
  dev.park_all_zero();

  FringeScan scan;
  scan.heater = heater;
  scan.input_mode = top;
  scan.monitored_output = top;

  Eigen::VectorXcd input = Eigen::VectorXcd::Zero(dev.n_modes());
  if (heater.kind == HeaterKind::internal) {
    route_probe(dev, heater, {top}, top);
    input(top) = 1.0;
  } else {
    // External fringes need interference: equal coherent light on both
    // inputs, internal phase at quadrature for contrast.
    route_probe(dev, heater, {top, top + 1}, top);
    const double amp = 1.0 / std::sqrt(2.0);
    input(top) = amp;
    input(top + 1) = amp;
    TuningCurve quad;  // nominal fallback
    if (internal_fit) quad = internal_fit->inversion(HeaterKind::internal);
    dev.set_phase(heater.module, heater.mzi, HeaterKind::internal, kPi / 2.0,
                  internal_fit ? &quad : nullptr);
  }

  scan.drive_words.reserve(n_points);
  scan.intensities.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    const int word = static_cast<int>(std::lround(
        static_cast<double>(i) * (kDriveLevels - 1) /
        static_cast<double>(n_points - 1)));
    dev.set_word(heater.module, heater.mzi, heater.kind, word);
    const Eigen::VectorXd out = dev.measure_coherent(input, derive_seed(seed,
                                                     static_cast<std::uint64_t>(i)));
    scan.drive_words.push_back(word);
    scan.intensities.push_back(out(top));
  }
  return scan;
}

namespace {

/// Profiled residual: best (A, C, S) for fixed alpha by a 3x3 normal-
/// equation solve; returns the sum of squared residuals.
double profiled_ssr(const std::vector<double>& p, const std::vector<double>& y,
                    double alpha, Eigen::Vector3d* coeffs = nullptr) {
  const std::size_t n = p.size();
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::cos(alpha * p[i]);
    const double s = std::sin(alpha * p[i]);
    m(0, 0) += 1.0;
    m(0, 1) += c;
    m(0, 2) += s;
    m(1, 1) += c * c;
    m(1, 2) += c * s;
    m(2, 2) += s * s;
    b(0) += y[i];
    b(1) += y[i] * c;
    b(2) += y[i] * s;
  }
  m(1, 0) = m(0, 1);
  m(2, 0) = m(0, 2);
  m(2, 1) = m(1, 2);
  const Eigen::Vector3d x = m.ldlt().solve(b);
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double fit = x(0) + x(1) * std::cos(alpha * p[i]) +
                       x(2) * std::sin(alpha * p[i]);
    const double r = y[i] - fit;
    ssr += r * r;
  }
  if (coeffs) *coeffs = x;
  return ssr;
}

}  // namespace

FringeFit fit_tuning_curve(const FringeScan& scan) {
  const std::size_t n = scan.drive_words.size();
  if (scan.intensities.size() != n) {
    throw ValidationError("fit_tuning_curve: words/intensities size mismatch");
  }
  if (n < 8) {
    throw FitError("fit_tuning_curve: underdetermined (need >= 8 points)");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (scan.drive_words[i] <= scan.drive_words[i - 1]) {
      throw ValidationError(
          "fit_tuning_curve: drive words must be strictly increasing");
    }
  }
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = drive_power(scan.drive_words[i]);
  }
  const std::vector<double>& y = scan.intensities;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double dev_max = 0.0;
  for (double v : y) dev_max = std::max(dev_max, std::abs(v - mean));
  if (dev_max < 1e-12 * std::max(1.0, std::abs(mean))) {
    throw FitError("fit_tuning_curve: constant scan, no fringe visible");
  }

  // Frequency seed: dominant discrete-Fourier bin with parabolic
  // interpolation, assuming near-uniform word spacing.
  const std::size_t kmax = n / 2;
  std::vector<double> mag(kmax + 1, 0.0);
  double best_mag = -1.0;
  std::size_t best_k = 1;
  for (std::size_t k = 1; k <= kmax; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -kTwoPi * static_cast<double>(j * k) /
                         static_cast<double>(n);
      acc += (y[j] - mean) * std::complex<double>(std::cos(ang),
                                                  std::sin(ang));
    }
    mag[k] = std::abs(acc);
    if (mag[k] > best_mag) {
      best_mag = mag[k];
      best_k = k;
    }
  }
  double k_hat = static_cast<double>(best_k);
  if (best_k > 1 && best_k < kmax) {
    const double l = mag[best_k - 1];
    const double c = mag[best_k];
    const double r = mag[best_k + 1];
    const double den = l - 2.0 * c + r;
    if (std::abs(den) > 1e-30) {
      const double shift = 0.5 * (l - r) / den;
      if (std::abs(shift) <= 1.0) k_hat += shift;
    }
  }
  const double span = p.back() - p.front();
  const double dp = span / static_cast<double>(n - 1);
  double alpha0 = kTwoPi * k_hat / (static_cast<double>(n) * dp);
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) {
    throw FitError("fit_tuning_curve: frequency seed failed");
  }

  // Grid around the seed, then golden-section on the profiled residual.
  const double lo = 0.4 * alpha0;
  const double hi = 1.6 * alpha0;
  const int steps = 241;
  double best_alpha = alpha0;
  double best_ssr = profiled_ssr(p, y, alpha0);
  for (int i = 0; i < steps; ++i) {
    const double a = lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(steps - 1);
    const double ssr = profiled_ssr(p, y, a);
    if (ssr < best_ssr) {
      best_ssr = ssr;
      best_alpha = a;
    }
  }
  {
    const double step = (hi - lo) / static_cast<double>(steps - 1);
    double a = std::max(lo, best_alpha - step);
    double b = best_alpha + step;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = profiled_ssr(p, y, x1);
    double f2 = profiled_ssr(p, y, x2);
    for (int it = 0; it < 90; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = profiled_ssr(p, y, x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = profiled_ssr(p, y, x2);
      }
    }
    best_alpha = 0.5 * (a + b);
  }

  Eigen::Vector3d lin;
  best_ssr = profiled_ssr(p, y, best_alpha, &lin);

  // Damped least squares on (A, C, S, alpha).
  Eigen::Vector4d x(lin(0), lin(1), lin(2), best_alpha);
  double lambda = 1e-3;
  const auto ssr_of = [&](const Eigen::Vector4d& q) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = std::cos(q(3) * p[i]);
      const double s = std::sin(q(3) * p[i]);
      const double r = q(0) + q(1) * c + q(2) * s - y[i];
      ssr += r * r;
    }
    return ssr;
  };
  double cur = ssr_of(x);
  bool converged = false;
  for (int it = 0; it < 200 && !converged; ++it) {
    Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
    Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const double c = std::cos(x(3) * p[i]);
      const double s = std::sin(x(3) * p[i]);
      const double r = x(0) + x(1) * c + x(2) * s - y[i];
      Eigen::Vector4d j(1.0, c, s, p[i] * (-x(1) * s + x(2) * c));
      jtj += j * j.transpose();
      jtr += j * r;
    }
    bool accepted = false;
    for (int tries = 0; tries < 12 && !accepted; ++tries) {
      Eigen::Matrix4d damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal();
      const Eigen::Vector4d delta = damped.ldlt().solve(-jtr);
      const Eigen::Vector4d trial = x + delta;
      const double trial_ssr = ssr_of(trial);
      if (trial_ssr <= cur) {
        x = trial;
        cur = trial_ssr;
        lambda = std::max(lambda / 3.0, 1e-12);
        converged = delta.cwiseAbs().maxCoeff() < 1e-10;
        accepted = true;
      } else {
        lambda *= 5.0;
      }
    }
    if (!accepted) break;  // stuck: damping exhausted without improvement
  }

  FringeFit fit;
  fit.alpha = std::abs(x(3));
  fit.offset = x(0);
  fit.amplitude = std::hypot(x(1), x(2));
  fit.fringe_phi0 = wrap_2pi(std::atan2(-x(2), x(1)));
  fit.rms_residual = std::sqrt(cur / static_cast<double>(n));
  fit.n_points = static_cast<int>(n);
  if (!(fit.offset > 0.0)) {
    throw FitError("fit_tuning_curve: nonphysical intensity offset");
  }
  fit.visibility = fit.amplitude / fit.offset;
  if (fit.visibility < 1e-6) {
    throw FitError("fit_tuning_curve: zero visibility, fringe invisible");
  }
  if (fit.alpha * span < kTwoPi) {
    throw FitError(
        "fit_tuning_curve: scan covers less than one full fringe");
  }
  return fit;
}

double measure_crosstalk(Device& dev, int module, int victim_mzi,
                         int aggressor_mzi, bool push_pull,
                         std::uint64_t seed) {
  if (victim_mzi == aggressor_mzi) {
    throw ValidationError("measure_crosstalk: victim equals aggressor");
  }
  const HeaterRef victim{module, victim_mzi, HeaterKind::internal};
  const HeaterRef aggressor{module, aggressor_mzi, HeaterKind::internal};
  check_heater(dev, victim);
  check_heater(dev, aggressor);

  SettingsGuard guard(dev);
  dev.set_push_pull(push_pull);
  const FringeFit fit_v =
      fit_tuning_curve(fringe_scan(dev, victim, 256, derive_seed(seed, 0)));
  const FringeFit fit_a =
      fit_tuning_curve(fringe_scan(dev, aggressor, 256, derive_seed(seed, 1)));

  // Re-establish the victim's probe route (the scans restored the device),
  // then park the victim at fringe quadrature where dI/dphase is maximal.
  dev.park_all_zero();
  const int top = dev.assembly().modules[module].top_mode(victim_mzi);
  route_probe(dev, victim, {top}, top);
  const TuningCurve fringe_curve{fit_v.alpha, fit_v.fringe_phi0, fit_v.alpha,
                                 kDriveLevels};
  dev.set_word(module, victim_mzi, HeaterKind::internal,
               quantize_drive(kPi / 2.0, fringe_curve).word);

  const TuningCurve agg_inv = fit_a.inversion(HeaterKind::internal);
  const int sweep_points = 65;
  std::vector<double> xs, psis;
  xs.reserve(sweep_points);
  psis.reserve(sweep_points);
  Eigen::VectorXcd input = Eigen::VectorXcd::Zero(dev.n_modes());
  input(top) = 1.0;
  for (int j = 0; j < sweep_points; ++j) {
    const double target = kPi * static_cast<double>(j) /
                          static_cast<double>(sweep_points - 1);
    const DriveResult dr = quantize_drive(target, agg_inv);
    dev.set_word(module, aggressor_mzi, HeaterKind::internal, dr.word);
    const Eigen::VectorXd out = dev.measure_coherent(
        input, derive_seed(seed, 100 + static_cast<std::uint64_t>(j)));
    const double c = std::clamp(
        (out(top) - fit_v.offset) / fit_v.amplitude, -1.0, 1.0);
    // The drive may realize the target through any 2*pi wrap; fold the
    // realized-phase estimate back onto the commanded branch so the wrap
    // choice cannot split the regression.
    xs.push_back(target + wrap_pm_pi(dr.realized_phase - target));
    psis.push_back(std::acos(c));
  }

  // Least-squares slope of fringe phase against realized aggressor phase.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double m = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += psis[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * psis[i];
  }
  const double denom = m * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) {
    throw FitError("measure_crosstalk: aggressor sweep is degenerate");
  }
  return (m * sxy - sx * sy) / denom;
}

}  // namespace meshsim
