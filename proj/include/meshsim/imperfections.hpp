#pragma once

#include <cstdint>
#include <vector>

#include "meshsim/assembly.hpp"

namespace meshsim {

/// Statistical description of fabricated hardware. Couplings and losses are
/// drawn per coupler / per MZI; fiber, interface, and propagation losses are
/// fixed values. Crosstalk coefficients couple like heaters (internal to
/// internal, external to external) within one module by commanded-phase
/// superposition.
struct ImperfectionSpec {
  double coupling_mean = 0.57;  // intensity ratio per coupler
  double coupling_sd = 0.04;
  double coupler_excess_db_mean = 2.1;  // dB per coupler
  double coupler_excess_db_sd = 0.3;
  double fiber_loss_db = 0.3;      // per facet
  double interface_loss_db = 0.2;  // per chip-chip interface
  double propagation_db_per_cm = 0.35;
  double tuning_range_pi_mean = 2.7;  // heater span, units of pi rad
  double tuning_range_pi_sd = 0.2;
  double crosstalk_neighbor = 0.01;       // phase per unit aggressor phase
  double crosstalk_next_nearest = 0.007;  // same, |i-j| = 2
  double single_heater_factor = 2.0;      // crosstalk scale without push-pull

  /// Typical fabricated values (the defaults above).
  static ImperfectionSpec typical() { return {}; }

  /// Typical means with all spreads removed; deterministic hardware.
  static ImperfectionSpec nominal();

  /// Lossless 50:50 hardware, no crosstalk, nominal tuning range.
  static ImperfectionSpec ideal();
};

/// Checks ranges (couplings in [0,1], losses and coefficients nonnegative,
/// positive tuning range); throws ValidationError.
void validate(const ImperfectionSpec& spec);

/// Geometry of an assembly to fabricate.
struct AssemblyLayout {
  int n_modes = 20;
  int n_modules = 3;
  int module_width = 10;
  int first_parity = 0;  // parity alternates 0,1,0,... from here
  double chip_length_cm = 2.5;
};

/// Draws one hardware instance. Deterministic in (spec, layout, seed); the
/// draw order is fixed (per module, per MZI: r1, r2, excess loss, internal
/// range, external range) so a given seed always yields the same device.
/// Couplings are truncated to [0, 1], losses and ranges to nonnegative.
/// All MZIs start at zero actuated phase.
Assembly sample_hardware(const ImperfectionSpec& spec,
                         const AssemblyLayout& layout, std::uint64_t seed);

/// Thermal crosstalk between like heaters of one module:
/// effective_j = commanded_j + sum_{i != j} c(|i-j|) * commanded_i, with
/// c(1) = crosstalk_neighbor, c(2) = crosstalk_next_nearest, zero beyond.
/// Without push-pull every coefficient is multiplied by
/// single_heater_factor.
std::vector<double> apply_crosstalk(const std::vector<double>& commanded,
                                    const ImperfectionSpec& spec,
                                    bool push_pull);

}  // namespace meshsim
