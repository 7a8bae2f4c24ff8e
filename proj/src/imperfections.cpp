#include "meshsim/imperfections.hpp"

#include <cmath>
#include <limits>

#include "meshsim/rng.hpp"

namespace meshsim {

ImperfectionSpec ImperfectionSpec::nominal() {
  ImperfectionSpec s;
  s.coupling_sd = 0.0;
  s.coupler_excess_db_sd = 0.0;
  s.tuning_range_pi_sd = 0.0;
  return s;
}

ImperfectionSpec ImperfectionSpec::ideal() {
  ImperfectionSpec s;
  s.coupling_mean = 0.5;
  s.coupling_sd = 0.0;
  s.coupler_excess_db_mean = 0.0;
  s.coupler_excess_db_sd = 0.0;
  s.fiber_loss_db = 0.0;
  s.interface_loss_db = 0.0;
  s.propagation_db_per_cm = 0.0;
  s.tuning_range_pi_sd = 0.0;
  s.crosstalk_neighbor = 0.0;
  s.crosstalk_next_nearest = 0.0;
  return s;
}

void validate(const ImperfectionSpec& spec) {
  const auto bad = [](double v) { return !std::isfinite(v) || v < 0.0; };
  if (bad(spec.coupling_mean) || spec.coupling_mean > 1.0) {
    throw ValidationError("imperfections: coupling_mean must lie in [0, 1]");
  }
  if (bad(spec.coupling_sd) || bad(spec.coupler_excess_db_mean) ||
      bad(spec.coupler_excess_db_sd) || bad(spec.fiber_loss_db) ||
      bad(spec.interface_loss_db) || bad(spec.propagation_db_per_cm) ||
      bad(spec.tuning_range_pi_sd) || bad(spec.crosstalk_neighbor) ||
      bad(spec.crosstalk_next_nearest) || bad(spec.single_heater_factor)) {
    throw ValidationError(
        "imperfections: losses, spreads, and crosstalk must be nonnegative");
  }
  if (!(spec.tuning_range_pi_mean > 0.0)) {
    throw ValidationError("imperfections: tuning range must be positive");
  }
}

namespace {

void validate_layout(const AssemblyLayout& layout) {
  if (layout.n_modes < 1 || layout.n_modules < 1 || layout.module_width < 1) {
    throw ValidationError(
        "layout: n_modes, n_modules, module_width must be positive");
  }
  if (layout.first_parity != 0 && layout.first_parity != 1) {
    throw ValidationError("layout: first_parity must be 0 or 1");
  }
  if (!(layout.chip_length_cm >= 0.0)) {
    throw ValidationError("layout: chip length must be nonnegative");
  }
}

}  // namespace

Assembly sample_hardware(const ImperfectionSpec& spec,
                         const AssemblyLayout& layout, std::uint64_t seed) {
  validate(spec);
  validate_layout(layout);
  const double inf = std::numeric_limits<double>::infinity();
  const double arm_loss_db =
      spec.propagation_db_per_cm * layout.chip_length_cm;
  Rng rng(seed);
  Assembly a;
  a.n_modes = layout.n_modes;
  a.fiber_loss_db = spec.fiber_loss_db;
  a.interface_loss_db = spec.interface_loss_db;
  a.modules.reserve(layout.n_modules);
  for (int mod = 0; mod < layout.n_modules; ++mod) {
    ChipModule chip;
    chip.width = layout.module_width;
    chip.parity = (layout.first_parity + mod) % 2;
    chip.pass_loss_db = arm_loss_db;
    chip.mzis.resize(layout.module_width);
    for (auto& unit : chip.mzis) {
      unit.hw.r1 =
          truncated_gauss(rng, spec.coupling_mean, spec.coupling_sd, 0.0, 1.0);
      unit.hw.r2 =
          truncated_gauss(rng, spec.coupling_mean, spec.coupling_sd, 0.0, 1.0);
      unit.hw.coupler_excess_loss_db = truncated_gauss(
          rng, spec.coupler_excess_db_mean, spec.coupler_excess_db_sd, 0.0,
          inf);
      unit.hw.arm_loss_db = arm_loss_db;
      const double int_range =
          kPi * truncated_gauss(rng, spec.tuning_range_pi_mean,
                                spec.tuning_range_pi_sd, 0.0, inf);
      const double ext_range =
          kPi * truncated_gauss(rng, spec.tuning_range_pi_mean,
                                spec.tuning_range_pi_sd, 0.0, inf);
      unit.internal_curve = TuningCurve{int_range, 0.0, int_range,
                                        kDriveLevels};
      unit.external_curve = TuningCurve{ext_range, 0.0, ext_range,
                                        kDriveLevels};
      unit.setting = MZISetting{0.0, 0.0};  // zero drive
    }
    a.modules.push_back(std::move(chip));
  }
  return a;
}

std::vector<double> apply_crosstalk(const std::vector<double>& commanded,
                                    const ImperfectionSpec& spec,
                                    bool push_pull) {
  validate(spec);
  // Coefficients are dimensionless (phase picked up per unit commanded
  // phase on the aggressor), so superposition is a plain weighted sum.
  const double scale = push_pull ? 1.0 : spec.single_heater_factor;
  const double c1 = scale * spec.crosstalk_neighbor;
  const double c2 = scale * spec.crosstalk_next_nearest;
  const int n = static_cast<int>(commanded.size());
  std::vector<double> effective(commanded);
  for (int j = 0; j < n; ++j) {
    double pick = 0.0;
    if (j - 1 >= 0) pick += c1 * commanded[j - 1];
    if (j + 1 < n) pick += c1 * commanded[j + 1];
    if (j - 2 >= 0) pick += c2 * commanded[j - 2];
    if (j + 2 < n) pick += c2 * commanded[j + 2];
    effective[j] += pick;
  }
  return effective;
}

}  // namespace meshsim
