#include "meshsim/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <utility>

#include "meshsim/rng.hpp"

namespace meshsim {

std::vector<int> MeshPlacement::io_modes() const {
  std::vector<int> modes(static_cast<std::size_t>(n_sub));
  for (int r = 0; r < n_sub; ++r) modes[static_cast<std::size_t>(r)] = base_mode + r;
  return modes;
}

MeshPlacement make_central_placement(const Assembly& assembly, int n_sub) {
  const int n = assembly.n_modes;
  const int n_modules = static_cast<int>(assembly.modules.size());
  if (n_sub < 2) {
    throw ValidationError("make_central_placement: mesh needs at least two modes");
  }
  if (n_sub > n) {
    throw RoutingError("make_central_placement: mesh wider than the assembly");
  }
  if (n_modules < n_sub) {
    throw RoutingError(
        "make_central_placement: an n-mode mesh needs n modules, have " +
        std::to_string(n_modules));
  }
  for (int l = 0; l < n_sub; ++l) {
    if (assembly.modules[l].parity != l % 2) {
      throw RoutingError(
          "make_central_placement: module parities must alternate starting "
          "even to host a rectangular mesh");
    }
  }

  MeshPlacement placement;
  placement.n_sub = n_sub;
  // Even base keeps mesh layer parity aligned with module parity.
  placement.base_mode = ((n - n_sub) / 2) & ~1;
  const int base = placement.base_mode;

  for (int l = 0; l < n_sub; ++l) {
    const ChipModule& mod = assembly.modules[l];
    const int pl = l % 2;
    const int nslots = layer_slots(n_sub, pl);
    std::vector<char> covered(static_cast<std::size_t>(n_sub), 0);
    for (int s = 0; s < nslots; ++s) {
      const int r = pl + 2 * s;
      const int k = mod.mzi_on_mode(base + r, n);
      if (k < 0 || mod.top_mode(k) != base + r) {
        throw RoutingError(
            "make_central_placement: mesh slot does not align with a "
            "physical interferometer");
      }
      placement.actives.push_back(ActiveSite{l, s, l, k, r});
      covered[static_cast<std::size_t>(r)] = 1;
      covered[static_cast<std::size_t>(r + 1)] = 1;
    }
    for (int r = 0; r < n_sub; ++r) {
      if (covered[static_cast<std::size_t>(r)]) continue;
      const int mode = base + r;
      const int k = mod.mzi_on_mode(mode, n);
      if (k < 0) continue;  // edge mode passes this module uncoupled
      const bool on_top = mod.top_mode(k) == mode;
      const int partner = on_top ? mode + 1 : mode - 1;
      if (partner >= base && partner < base + n_sub) {
        throw RoutingError(
            "make_central_placement: guard would couple two mesh modes");
      }
      placement.guards.push_back(GuardSite{l, l, k, r, on_top});
    }
  }
  return placement;
}

namespace {

void check_site(const Device& dev, int module, int mzi) {
  if (module < 0 || module >= dev.n_modules()) {
    throw IndexError("placement references module " + std::to_string(module) +
                     " outside the device");
  }
  if (mzi < 0 || mzi >= dev.assembly().modules[module].width) {
    throw IndexError("placement references MZI " + std::to_string(mzi) +
                     " outside module " + std::to_string(module));
  }
}

}  // namespace

void program_mesh(Device& dev, const MeshSettings& settings,
                  const MeshPlacement& placement,
                  const CalibrationTable* calibration) {
  validate_settings(settings);
  if (settings.n_modes != placement.n_sub) {
    throw DimensionError("program_mesh: settings are for " +
                         std::to_string(settings.n_modes) +
                         " modes, placement hosts " +
                         std::to_string(placement.n_sub));
  }
  if (placement.base_mode < 0 ||
      placement.base_mode + placement.n_sub > dev.n_modes()) {
    throw IndexError("program_mesh: placement window outside the device");
  }
  for (const ActiveSite& a : placement.actives) check_site(dev, a.module, a.mzi);
  for (const GuardSite& g : placement.guards) check_site(dev, g.module, g.mzi);

  const auto set_target = [&](int module, int mzi, HeaterKind kind,
                              double target) {
    TuningCurve curve;
    const TuningCurve* inv = nullptr;
    if (calibration) {
      if (const HeaterCalibration* e = calibration->find(module, mzi, kind)) {
        curve = e->fit.inversion(kind);
        inv = &curve;
      }
    }
    dev.set_phase(module, mzi, kind, target, inv);
  };

  dev.park_all_zero();

  // psi[r] tracks the phase accumulated on mesh mode r ahead of the next
  // layer (bar guards flip their top arm's sign). Each active external
  // phase absorbs the difference across its pair; the common part rides
  // forward as an unobservable per-pair output phase.
  std::vector<double> psi(static_cast<std::size_t>(placement.n_sub), 0.0);
  for (int l = 0; l < placement.n_sub; ++l) {
    for (const GuardSite& g : placement.guards) {
      if (g.layer != l) continue;
      set_target(g.module, g.mzi, HeaterKind::internal, kPi);
      if (g.light_on_top) psi[static_cast<std::size_t>(g.rel_mode)] += kPi;
    }
    for (const ActiveSite& a : placement.actives) {
      if (a.layer != l) continue;
      const MZISetting& want =
          settings.layers[static_cast<std::size_t>(l)]
                         [static_cast<std::size_t>(a.slot)];
      const std::size_t r = static_cast<std::size_t>(a.rel_top);
      const double phi_prog = wrap_2pi(want.phi - psi[r] + psi[r + 1]);
      set_target(a.module, a.mzi, HeaterKind::internal, want.theta);
      set_target(a.module, a.mzi, HeaterKind::external, phi_prog);
      psi[r] = psi[r + 1];
    }
  }

  // Modules past the mesh carry the window to the output facet on bars.
  for (int t = placement.n_sub; t < dev.n_modules(); ++t) {
    const ChipModule& mod = dev.assembly().modules[t];
    std::set<int> barred;
    for (int r = 0; r < placement.n_sub; ++r) {
      const int k = mod.mzi_on_mode(placement.base_mode + r, dev.n_modes());
      if (k >= 0 && barred.insert(k).second) {
        set_target(t, k, HeaterKind::internal, kPi);
      }
    }
  }
}

CalibrationTable calibrate_mesh(Device& dev, const MeshPlacement& placement,
                                int n_points, std::uint64_t seed) {
  std::uint64_t ctr = 0;
  CalibrationTable table;

  std::set<std::pair<int, int>> internal_sites;
  for (const ActiveSite& a : placement.actives) {
    internal_sites.emplace(a.module, a.mzi);
  }
  for (const GuardSite& g : placement.guards) {
    internal_sites.emplace(g.module, g.mzi);
  }
  for (const auto& [module, mzi] : internal_sites) {
    const HeaterRef ref{module, mzi, HeaterKind::internal};
    const FringeFit fit =
        fit_tuning_curve(fringe_scan(dev, ref, n_points, derive_seed(seed, ctr)));
    ++ctr;
    HeaterCalibration entry;
    entry.module = module;
    entry.mzi = mzi;
    entry.kind = HeaterKind::internal;
    entry.fit = fit;
    entry.coupling_product = fit.visibility / (2.0 * (1.0 + fit.visibility));
    table.entries.push_back(entry);
  }

  std::set<std::pair<int, int>> external_sites;
  for (const ActiveSite& a : placement.actives) {
    // First-layer external phases act directly on the inputs and never
    // change a measured intensity, so they are left uncalibrated.
    if (a.layer >= 1) external_sites.emplace(a.module, a.mzi);
  }
  for (const auto& [module, mzi] : external_sites) {
    const HeaterCalibration* internal_entry =
        table.find(module, mzi, HeaterKind::internal);
    const HeaterRef ref{module, mzi, HeaterKind::external};
    const FringeFit fit = fit_tuning_curve(
        fringe_scan(dev, ref, n_points, derive_seed(seed, ctr),
                    internal_entry ? &internal_entry->fit : nullptr));
    ++ctr;
    HeaterCalibration entry;
    entry.module = module;
    entry.mzi = mzi;
    entry.kind = HeaterKind::external;
    entry.fit = fit;
    entry.coupling_product = std::numeric_limits<double>::quiet_NaN();
    table.entries.push_back(entry);
  }

  std::sort(table.entries.begin(), table.entries.end(),
            [](const HeaterCalibration& a, const HeaterCalibration& b) {
              return std::tie(a.module, a.mzi, a.kind) <
                     std::tie(b.module, b.mzi, b.kind);
            });
  return table;
}

IntensityMatrix measure_transfer_matrix(Device& dev,
                                        const std::vector<int>& inputs,
                                        const std::vector<int>& outputs,
                                        std::uint64_t seed) {
  if (inputs.empty() || outputs.empty()) {
    throw ValidationError("measure_transfer_matrix: empty mode list");
  }
  for (int m : inputs) {
    if (m < 0 || m >= dev.n_modes()) {
      throw IndexError("measure_transfer_matrix: input mode out of range");
    }
  }
  for (int m : outputs) {
    if (m < 0 || m >= dev.n_modes()) {
      throw IndexError("measure_transfer_matrix: output mode out of range");
    }
  }
  IntensityMatrix result(static_cast<Eigen::Index>(outputs.size()),
                         static_cast<Eigen::Index>(inputs.size()));
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    const Eigen::VectorXd measured = dev.measure(
        inputs[j], derive_seed(seed, static_cast<std::uint64_t>(inputs[j])));
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      result(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          measured(outputs[i]);
    }
  }
  return result;
}

std::vector<int> reachable_outputs(const Assembly& assembly, int input) {
  if (input < 0 || input >= assembly.n_modes) {
    throw IndexError("reachable_outputs: input mode out of range");
  }
  std::vector<char> reached(static_cast<std::size_t>(assembly.n_modes), 0);
  reached[static_cast<std::size_t>(input)] = 1;
  for (const ChipModule& mod : assembly.modules) {
    std::vector<char> next = reached;
    for (int m = 0; m < assembly.n_modes; ++m) {
      if (!reached[static_cast<std::size_t>(m)]) continue;
      const int k = mod.mzi_on_mode(m, assembly.n_modes);
      if (k < 0) continue;
      next[static_cast<std::size_t>(mod.top_mode(k))] = 1;
      next[static_cast<std::size_t>(mod.top_mode(k) + 1)] = 1;
    }
    reached = std::move(next);
  }
  std::vector<int> out;
  for (int m = 0; m < assembly.n_modes; ++m) {
    if (reached[static_cast<std::size_t>(m)]) out.push_back(m);
  }
  return out;
}

namespace {

struct HeaterCoord {
  int module = 0;
  int mzi = 0;
  HeaterKind kind = HeaterKind::internal;
};

struct SweepOutcome {
  std::vector<double> trace;
  int sweeps_used = 0;
  bool converged = false;
};

std::vector<MZISetting> snapshot_settings(const Device& dev) {
  std::vector<MZISetting> snap;
  for (const ChipModule& mod : dev.assembly().modules) {
    for (const MziUnit& u : mod.mzis) snap.push_back(u.setting);
  }
  return snap;
}

void restore_settings(Device& dev, const std::vector<MZISetting>& snap) {
  std::size_t i = 0;
  for (ChipModule& mod : dev.assembly().modules) {
    for (MziUnit& u : mod.mzis) u.setting = snap[i++];
  }
}

// Feedback sweeps command drive power directly (the lab knob), not a
// phase through some assumed tuning curve: a unit-alpha inversion makes
// set_phase interpret the target as a raw normalized power, so the sweep
// spans the heater's full physical range whatever its true curve is.
const TuningCurve kPowerCurve{1.0, 0.0, 1.0, kDriveLevels};

void sweep_coordinate_quantized(Device& dev, const HeaterCoord& c,
                                const std::function<double()>& eval) {
  int best_word = kZeroWord;
  double best = std::numeric_limits<double>::infinity();
  for (int w = 0; w < kDriveLevels; ++w) {
    dev.set_word(c.module, c.mzi, c.kind, w);
    const double e = eval();
    if (e < best) {
      best = e;
      best_word = w;
    }
  }
  dev.set_word(c.module, c.mzi, c.kind, best_word);
}

void sweep_coordinate_continuous(Device& dev, const HeaterCoord& c,
                                 const std::function<double()>& eval) {
  const auto value = [&](double power) {
    dev.set_phase(c.module, c.mzi, c.kind, power, &kPowerCurve);
    return eval();
  };
  const double lo = drive_power(0);
  const double hi = drive_power(kDriveLevels - 1);
  const int coarse = 128;
  double best_t = lo;
  double best = std::numeric_limits<double>::infinity();
  for (int g = 0; g <= coarse; ++g) {
    const double t = lo + (hi - lo) * static_cast<double>(g) /
                              static_cast<double>(coarse);
    const double e = value(t);
    if (e < best) {
      best = e;
      best_t = t;
    }
  }
  const double step = (hi - lo) / static_cast<double>(coarse);
  double a = std::max(lo, best_t - step);
  double b = std::min(hi, best_t + step);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = value(x1);
  double f2 = value(x2);
  for (int it = 0; it < 200 && b - a > 1e-11; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = value(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = value(x2);
    }
  }
  value(f1 < f2 ? x1 : x2);  // leave the heater at the winner
}

/// Cyclic coordinate descent on a measured objective (smaller is
/// better). A sweep is kept only if it improves the running objective by
/// at least `tol`; a rejected sweep is rolled back, so the recorded
/// trace never increases.
SweepOutcome run_sweeps(Device& dev, const std::vector<HeaterCoord>& coords,
                        const std::function<double()>& eval, int max_sweeps,
                        double tol) {
  SweepOutcome out;
  out.trace.push_back(eval());
  for (int s = 1; s <= max_sweeps; ++s) {
    const std::vector<MZISetting> snap = snapshot_settings(dev);
    for (const HeaterCoord& c : coords) {
      if (dev.drive().quantized) {
        sweep_coordinate_quantized(dev, c, eval);
      } else {
        sweep_coordinate_continuous(dev, c, eval);
      }
    }
    const double objective = eval();
    out.sweeps_used = s;
    if (objective < out.trace.back() - tol) {
      out.trace.push_back(objective);
    } else {
      restore_settings(dev, snap);
      out.trace.push_back(out.trace.back());
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace

SwitchResult configure_switch(Device& dev, int input, int output,
                              int max_sweeps, std::uint64_t seed) {
  const int n = dev.n_modes();
  if (input < 0 || input >= n || output < 0 || output >= n) {
    throw IndexError("configure_switch: mode out of range");
  }
  if (max_sweeps < 0) {
    throw ValidationError("configure_switch: max_sweeps must be >= 0");
  }

  // Breadth-first pass over the module chain, modes visited ascending and
  // stay tried before swap, so the recovered path is deterministic.
  const int n_modules = dev.n_modules();
  std::vector<std::vector<int>> prev(
      static_cast<std::size_t>(n_modules) + 1,
      std::vector<int>(static_cast<std::size_t>(n), -1));
  std::vector<char> reached(static_cast<std::size_t>(n), 0);
  reached[static_cast<std::size_t>(input)] = 1;
  for (int t = 0; t < n_modules; ++t) {
    std::vector<char> next(static_cast<std::size_t>(n), 0);
    auto reach = [&](int from, int to) {
      if (!next[static_cast<std::size_t>(to)]) {
        next[static_cast<std::size_t>(to)] = 1;
        prev[static_cast<std::size_t>(t) + 1][static_cast<std::size_t>(to)] =
            from;
      }
    };
    const ChipModule& mod = dev.assembly().modules[t];
    for (int m = 0; m < n; ++m) {
      if (!reached[static_cast<std::size_t>(m)]) continue;
      const int k = mod.mzi_on_mode(m, n);
      reach(m, m);
      if (k >= 0) {
        const int partner = mod.top_mode(k) == m ? m + 1 : m - 1;
        reach(m, partner);
      }
    }
    reached = std::move(next);
  }
  if (!reached[static_cast<std::size_t>(output)]) {
    throw RoutingError("configure_switch: output " + std::to_string(output) +
                       " is not reachable from input " + std::to_string(input));
  }

  std::vector<int> modes(static_cast<std::size_t>(n_modules) + 1);
  modes[static_cast<std::size_t>(n_modules)] = output;
  for (int t = n_modules; t >= 1; --t) {
    modes[static_cast<std::size_t>(t) - 1] =
        prev[static_cast<std::size_t>(t)]
            [static_cast<std::size_t>(modes[static_cast<std::size_t>(t)])];
  }

  SwitchResult result;
  result.input = input;
  result.output = output;
  dev.park_all_zero();
  std::vector<HeaterCoord> coords;
  for (int t = 0; t < n_modules; ++t) {
    const int here = modes[static_cast<std::size_t>(t)];
    const int k = dev.assembly().modules[t].mzi_on_mode(here, n);
    if (k < 0) continue;
    const bool cross = modes[static_cast<std::size_t>(t) + 1] != here;
    result.path.push_back(SwitchStep{t, k, cross});
    dev.set_phase(t, k, HeaterKind::internal, cross ? 0.0 : kPi);
    coords.push_back(HeaterCoord{t, k, HeaterKind::internal});
  }

  std::uint64_t ctr = 0;
  const auto routed = [&]() {
    const Eigen::VectorXd intensities =
        dev.measure(input, derive_seed(seed, ctr++));
    const double total = intensities.sum();
    if (!(total > 0.0)) {
      throw DegenerateMeasurementError(
          "configure_switch: no light reaches the outputs");
    }
    return intensities(output) / total;
  };

  const SweepOutcome outcome =
      run_sweeps(dev, coords, [&]() { return -routed(); }, max_sweeps, 1e-6);
  result.routed_fraction = -outcome.trace.back();
  result.sweeps_used = outcome.sweeps_used;
  result.converged = outcome.converged;
  result.final_intensities = dev.measure(input, derive_seed(seed, ctr++));
  return result;
}

TritterResult self_configure_tritter(Device& dev, int max_sweeps,
                                     std::uint64_t seed, double tol) {
  if (max_sweeps < 0) {
    throw ValidationError("self_configure_tritter: max_sweeps must be >= 0");
  }
  if (!(tol >= 0.0) || !std::isfinite(tol)) {
    throw ValidationError("self_configure_tritter: tol must be finite");
  }
  const MeshPlacement placement = make_central_placement(dev.assembly(), 3);
  program_mesh(dev, rectangular_decompose(dft_matrix(3)), placement, nullptr);

  const std::vector<int> io = placement.io_modes();
  std::uint64_t ctr = 0;
  const auto objective = [&]() {
    const IntensityMatrix measured =
        measure_transfer_matrix(dev, io, io, derive_seed(seed, ctr++));
    const IntensityMatrix normalized = column_normalized(measured);
    return (normalized.array() - 1.0 / 3.0).square().sum();
  };

  std::vector<HeaterCoord> coords;
  for (const ActiveSite& a : placement.actives) {
    coords.push_back(HeaterCoord{a.module, a.mzi, HeaterKind::internal});
    coords.push_back(HeaterCoord{a.module, a.mzi, HeaterKind::external});
  }
  for (const GuardSite& g : placement.guards) {
    coords.push_back(HeaterCoord{g.module, g.mzi, HeaterKind::internal});
  }

  const SweepOutcome outcome = run_sweeps(dev, coords, objective, max_sweeps, tol);
  TritterResult result;
  result.objective = outcome.trace.back();
  result.sweeps_used = outcome.sweeps_used;
  result.converged = outcome.converged;
  result.objective_trace = outcome.trace;
  result.normalized = column_normalized(
      measure_transfer_matrix(dev, io, io, derive_seed(seed, ctr++)));
  return result;
}

ExperimentReport run_universal_experiment(const Device& prototype,
                                          int n_trials, std::uint64_t seed,
                                          const ExperimentOptions& options) {
  if (n_trials < 0) {
    throw ValidationError("run_universal_experiment: n_trials must be >= 0");
  }
  if (options.scan_points < 8 || options.scan_points > kDriveLevels) {
    throw ValidationError(
        "run_universal_experiment: scan_points must lie in [8, 256]");
  }
  const MeshPlacement placement =
      make_central_placement(prototype.assembly(), options.mesh_size);
  CalibrationTable table;
  {
    Device scratch = prototype;
    table = calibrate_mesh(scratch, placement, options.scan_points,
                           derive_seed(seed, 0));
  }

  ExperimentReport report;
  report.n_trials = n_trials;
  report.trials.resize(static_cast<std::size_t>(n_trials));
  const std::vector<int> io = placement.io_modes();

  const auto run_trial = [&](int i) {
    TrialRecord rec;
    rec.index = i;
    const std::uint64_t trial_seed =
        derive_seed(seed, 1 + static_cast<std::uint64_t>(i));
    try {
      rec.target =
          haar_random_unitary(options.mesh_size, derive_seed(trial_seed, 0));
      rec.settings = rectangular_decompose(rec.target);
      Device dev = prototype;
      program_mesh(dev, rec.settings, placement, &table);
      rec.measured =
          measure_transfer_matrix(dev, io, io, derive_seed(trial_seed, 1));
      rec.fidelity = amplitude_fidelity(rec.measured, rec.target);
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
      rec.fidelity = 0.0;
    }
    report.trials[static_cast<std::size_t>(i)] = std::move(rec);
  };

  if (options.policy == ExecutionPolicy::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n_trials; ++i) run_trial(i);
  } else {
    for (int i = 0; i < n_trials; ++i) run_trial(i);
  }

  double sum = 0.0;
  double min_fid = std::numeric_limits<double>::infinity();
  int n_ok = 0;
  for (const TrialRecord& rec : report.trials) {
    if (rec.failed) {
      ++report.n_failed;
      continue;
    }
    sum += rec.fidelity;
    min_fid = std::min(min_fid, rec.fidelity);
    ++n_ok;
  }
  if (n_ok > 0) {
    report.mean_fidelity = sum / n_ok;
    double ss = 0.0;
    for (const TrialRecord& rec : report.trials) {
      if (rec.failed) continue;
      const double d = rec.fidelity - report.mean_fidelity;
      ss += d * d;
    }
    report.sd_fidelity = std::sqrt(ss / n_ok);
    report.min_fidelity = min_fid;
  }
  return report;
}

}  // namespace meshsim
