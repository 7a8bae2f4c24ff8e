#pragma once

#include <cstdint>
#include <vector>

#include "meshsim/drive.hpp"
#include "meshsim/linalg.hpp"
#include "meshsim/mzi.hpp"

namespace meshsim {

/// One physical MZI with its hardware parameters, current (realized) phase
/// settings, and the tuning curves of its two heaters.
struct MziUnit {
  MZIHardware hw;
  MZISetting setting;
  TuningCurve internal_curve;
  TuningCurve external_curve;
};

/// A chip holding `width` MZIs side by side. An MZI at index m couples modes
/// (parity + 2m, parity + 2m + 1); odd-parity chips are offset by one
/// waveguide. MZIs whose lower mode would fall outside the assembly are
/// present but optically unused. Modes not covered by a usable MZI pass
/// straight through, attenuated by pass_loss_db.
struct ChipModule {
  int width = 0;
  int parity = 0;
  std::vector<MziUnit> mzis;
  double pass_loss_db = 0.0;

  int top_mode(int mzi) const { return parity + 2 * mzi; }
  bool usable(int mzi, int n_modes) const {
    return mzi >= 0 && mzi < width && top_mode(mzi) + 1 < n_modes;
  }
  /// Index of the MZI coupling `mode`, or -1 if the mode passes through.
  int mzi_on_mode(int mode, int n_modes) const {
    const int rel = mode - parity;
    if (rel < 0) return -1;
    const int m = rel / 2;
    return usable(m, n_modes) ? m : -1;
  }
};

/// A chain of chips with fiber coupling at both facets and chip-to-chip
/// interfaces between neighbors. Light traverses modules in index order.
struct Assembly {
  int n_modes = 0;
  std::vector<ChipModule> modules;
  double fiber_loss_db = 0.0;      // per facet
  double interface_loss_db = 0.0;  // per chip-chip interface
};

struct NoiseSpec {
  double sigma = 0.0;  // multiplicative intensity noise, 1 + sigma*N(0,1)
};

/// Transfer matrix of a single module on n_modes modes.
ComplexMatrix module_transfer(const ChipModule& mod, int n_modes);

/// Full assembly transfer: F_out * M_L * I * ... * I * M_1 * F_in with
/// scalar fiber (F) and interface (I) amplitude factors. Throws
/// ValidationError for an empty module list.
ComplexMatrix assembly_transfer(const Assembly& a);

/// Output field amplitudes for a given input field vector.
Eigen::VectorXcd propagate(const Assembly& a, const Eigen::VectorXcd& input);

/// Output intensities for unit input on one mode, with multiplicative
/// Gaussian measurement noise (clamped at zero). Deterministic in seed.
Eigen::VectorXd measure_intensities(const Assembly& a, int input_mode,
                                    const NoiseSpec& noise,
                                    std::uint64_t seed);

/// Same, for an arbitrary coherent input field.
Eigen::VectorXd measure_intensities(const Assembly& a,
                                    const Eigen::VectorXcd& input,
                                    const NoiseSpec& noise,
                                    std::uint64_t seed);

}  // namespace meshsim
