#pragma once

#include <vector>

#include "meshsim/linalg.hpp"
#include "meshsim/mzi.hpp"

namespace meshsim {

/// Phase program for an N-mode rectangular mesh: N layers of MZIs with
/// alternating parity (layer 0 couples (0,1),(2,3),...; layer 1 couples
/// (1,2),(3,4),...), a residual phase per output mode, and a global phase.
/// layers[l][s] drives the MZI on modes (parity + 2s, parity + 2s + 1)
/// where parity = l % 2. output_phases[0] is 0 by convention; the overall
/// U(1) factor lives in global_phase.
struct MeshSettings {
  int n_modes = 0;
  std::vector<std::vector<MZISetting>> layers;
  std::vector<double> output_phases;
  double global_phase = 0.0;
};

/// Number of MZI slots in a layer of the given parity.
inline int layer_slots(int n_modes, int parity) {
  return (n_modes - parity) / 2;
}

/// Factors a unitary into the rectangular mesh form
///   U = e^{i global} * diag(e^{i output_phases}) * M_{N} * ... * M_1,
/// where M_l is the ideal transfer of layer l. Nulls the lower triangle by
/// alternating column and row sweeps, then commutes the row factors through
/// the residual diagonal. All N(N-1)/2 slots are filled; an element already
/// below 1e-14 yields the bar setting (theta = pi, phi = 0). Requires a
/// square unitary with N >= 2 (ValidationError otherwise); bitwise
/// deterministic for identical input.
MeshSettings rectangular_decompose(const ComplexMatrix& u);

/// Rebuilds the unitary from mesh settings using ideal (lossless 50:50)
/// MZIs. Throws DimensionError when the settings shape does not match n.
ComplexMatrix reconstruct(const MeshSettings& settings, int n);

/// Shape check used by reconstruct and the serializers.
void validate_settings(const MeshSettings& settings);

}  // namespace meshsim
