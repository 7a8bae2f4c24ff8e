#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meshsim/calibration.hpp"
#include "meshsim/decompose.hpp"
#include "meshsim/device.hpp"
#include "meshsim/linalg.hpp"

namespace meshsim {

enum class ExecutionPolicy { serial, parallel };

/// One MZI of the embedded rectangular mesh: mesh coordinates
/// (layer, slot) and physical coordinates (module, mzi). `rel_top` is the
/// mesh-relative index of the MZI's top mode (absolute mode minus base).
struct ActiveSite {
  int layer = 0;
  int slot = 0;
  int module = 0;
  int mzi = 0;
  int rel_top = 0;
};

/// An MZI bordering the embedded mesh that must be held in the bar state
/// so mesh light stays inside the mode window. `light_on_top` records
/// which arm carries mesh light; a bar flips the top arm's sign, so a
/// top-arm guard injects a pi phase the programmer must compensate.
struct GuardSite {
  int layer = 0;
  int module = 0;
  int mzi = 0;
  int rel_mode = 0;
  bool light_on_top = false;
};

/// Embedding of an n_sub-mode rectangular mesh into a physical assembly.
/// Mesh layer l lives on module l; modules beyond n_sub layers are used
/// as bar-state I/O chains. Mesh mode r is physical mode base_mode + r.
struct MeshPlacement {
  int n_sub = 0;
  int base_mode = 0;
  std::vector<ActiveSite> actives;
  std::vector<GuardSite> guards;

  std::vector<int> io_modes() const;
};

/// Centers an n_sub-mode mesh on the assembly: base mode is (n - n_sub)/2
/// rounded down to even so mesh layer parity matches module parity.
/// Requires module parities alternating 0,1,... and at least n_sub
/// modules; throws RoutingError otherwise.
MeshPlacement make_central_placement(const Assembly& assembly, int n_sub);

/// Measures tuning curves for the heaters the placement actually drives:
/// internal heaters of every active and guard MZI, and external heaters
/// of actives past the first layer (first-layer input phases never reach
/// a detector). Coupling products are recorded for internal entries.
/// The device is restored before returning.
CalibrationTable calibrate_mesh(Device& dev, const MeshPlacement& placement,
                                int n_points, std::uint64_t seed);

/// Programs decomposed settings onto the embedded mesh. Guards and I/O
/// chains are driven to the bar state, unused heaters are parked at zero
/// drive, and external phases are adjusted for the pi flips that top-arm
/// guards inject upstream. With a calibration table, fitted curves are
/// used for every heater that has an entry; otherwise commands go through
/// nominal curves and land wherever the real hardware puts them.
void program_mesh(Device& dev, const MeshSettings& settings,
                  const MeshPlacement& placement,
                  const CalibrationTable* calibration = nullptr);

/// Intensity transfer matrix: feeds each input mode in turn and records
/// the given output modes. Each column is measured with a seed derived from
/// (seed, input mode), so a column's values do not depend on which other
/// columns were requested alongside it.
IntensityMatrix measure_transfer_matrix(Device& dev,
                                        const std::vector<int>& inputs,
                                        const std::vector<int>& outputs,
                                        std::uint64_t seed);

/// Output modes a single-mode input can reach through the assembly when
/// every MZI may be set arbitrarily. Sorted ascending.
std::vector<int> reachable_outputs(const Assembly& assembly, int input);

struct SwitchStep {
  int module = 0;
  int mzi = 0;
  bool cross = false;  // false: stay (bar), true: swap arms (cross)
};

struct SwitchResult {
  int input = 0;
  int output = 0;
  std::vector<SwitchStep> path;
  double routed_fraction = 0.0;
  int sweeps_used = 0;
  bool converged = false;
  Eigen::VectorXd final_intensities;
};

/// Routes `input` to `output` as a space switch: finds the unique
/// shallowest bar/cross path, programs it, then hill-climbs the internal
/// phases of the path MZIs on the measured routed fraction
/// I[output] / sum(I). Throws RoutingError when no path exists.
SwitchResult configure_switch(Device& dev, int input, int output,
                              int max_sweeps, std::uint64_t seed);

struct TritterResult {
  double objective = 0.0;
  int sweeps_used = 0;
  bool converged = false;
  IntensityMatrix normalized;
  std::vector<double> objective_trace;
};

/// Self-configures the central 3x3 mesh into a balanced three-way
/// splitter using only measured intensities: programs the discrete
/// Fourier transform as a starting point, then coordinate-descends every
/// mesh heater (active internals and externals, guard internals) on the
/// objective sum((P - 1/3)^2) over the column-normalized 3x3 intensity
/// matrix. No calibration data is used. The trace records the objective
/// after the initial programming and after each sweep; acceptance is
/// strict-improvement, so the trace never increases.
TritterResult self_configure_tritter(Device& dev, int max_sweeps,
                                     std::uint64_t seed, double tol = 1e-6);

struct ExperimentOptions {
  int scan_points = 256;
  int mesh_size = 3;
  ExecutionPolicy policy = ExecutionPolicy::parallel;
};

struct TrialRecord {
  int index = 0;
  ComplexMatrix target;
  MeshSettings settings;
  IntensityMatrix measured;
  double fidelity = 0.0;
  bool failed = false;
  std::string error;
};

struct ExperimentReport {
  int n_trials = 0;
  int n_failed = 0;
  double mean_fidelity = 0.0;
  double sd_fidelity = 0.0;
  double min_fidelity = 0.0;
  std::vector<TrialRecord> trials;
};

/// Programs and measures a batch of Haar-random target unitaries on the
/// centrally placed mesh. The prototype device is calibrated once on a
/// scratch copy; each trial then programs a fresh copy of the prototype
/// and compares column-normalized measured intensities against the
/// target's intensities by amplitude fidelity. Trials are independent
/// (per-trial derived seeds), so serial and parallel execution produce
/// identical reports; failures are recorded per trial, not thrown.
ExperimentReport run_universal_experiment(const Device& prototype,
                                          int n_trials, std::uint64_t seed,
                                          const ExperimentOptions& options = {});

}  // namespace meshsim
