#include "meshsim/decompose.hpp"

#include <cassert>
#include <cmath>
#include <string>
#include <utility>

namespace meshsim {

namespace {

constexpr double kNullTol = 1e-14;

/// Ideal two-mode block for given phases:
/// i*e^{i theta/2} * [[e^{i phi} s, c], [e^{i phi} c, -s]].
Eigen::Matrix2cd ideal_block(double theta, double phi) {
  return mzi_transfer(MZISetting{theta, phi}, MZIHardware{});
}

struct BlockOp {
  int mode = 0;  // acts on (mode, mode+1)
  double theta = 0.0;
  double phi = 0.0;
};

/// Block whose inverse, applied on columns (m, m+1), nulls v(r, m).
/// From (V T^-1)(r, m) = 0: e^{-i phi} tan(theta/2) = -v(r, m+1)/v(r, m).
BlockOp solve_right(const ComplexMatrix& v, int r, int m) {
  const Complex a = v(r, m);
  if (std::abs(a) < kNullTol) return {m, kPi, 0.0};  // already null: bar
  const Complex rho = v(r, m + 1) / a;
  const double mag = std::abs(rho);
  const double theta = 2.0 * std::atan(mag);
  const double phi = mag < kNullTol ? 0.0 : wrap_2pi(-std::arg(-rho));
  return {m, theta, phi};
}

/// Block that, applied on rows (m, m+1), nulls v(m+1, c).
/// From (T V)(m+1, c) = 0: tan(theta/2) e^{-i phi} = v(m, c)/v(m+1, c).
BlockOp solve_left(const ComplexMatrix& v, int c, int m) {
  const Complex a = v(m + 1, c);
  if (std::abs(a) < kNullTol) return {m, kPi, 0.0};
  const Complex rho = v(m, c) / a;
  const double mag = std::abs(rho);
  const double theta = 2.0 * std::atan(mag);
  const double phi = mag < kNullTol ? 0.0 : wrap_2pi(-std::arg(rho));
  return {m, theta, phi};
}

/// v <- v * T^-1 on columns (op.mode, op.mode+1).
void apply_right_inverse(ComplexMatrix& v, const BlockOp& op) {
  const Eigen::Matrix2cd ti = ideal_block(op.theta, op.phi).adjoint();
  const int m = op.mode;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const Complex a = v(i, m);
    const Complex b = v(i, m + 1);
    v(i, m) = a * ti(0, 0) + b * ti(1, 0);
    v(i, m + 1) = a * ti(0, 1) + b * ti(1, 1);
  }
}

/// v <- T * v on rows (op.mode, op.mode+1).
void apply_left(ComplexMatrix& v, const BlockOp& op) {
  const Eigen::Matrix2cd t = ideal_block(op.theta, op.phi);
  const int m = op.mode;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    const Complex a = v(m, j);
    const Complex b = v(m + 1, j);
    v(m, j) = t(0, 0) * a + t(0, 1) * b;
    v(m + 1, j) = t(1, 0) * a + t(1, 1) * b;
  }
}

/// Assigns each factor of the product F_0 * F_1 * ... * F_{K-1} (leftmost
/// applied last) to a rectangle position. Factors are placed right to left,
/// each at the earliest layer after every factor already occupying one of
/// its modes, advanced to the layer whose parity matches the mode pair.
/// Returns (layer, slot) per factor, layers 0-based with layer 0 parity 0.
std::vector<std::pair<int, int>> rectangle_schedule(
    int n, const std::vector<BlockOp>& factors) {
  std::vector<int> last(n, 0);  // highest 1-based layer touching each mode
  std::vector<std::pair<int, int>> out(factors.size());
  int max_layer = 0;
  for (int idx = static_cast<int>(factors.size()) - 1; idx >= 0; --idx) {
    const int m = factors[idx].mode;
    int layer = std::max(last[m], last[m + 1]) + 1;
    if ((layer - 1) % 2 != m % 2) ++layer;
    last[m] = last[m + 1] = layer;
    max_layer = std::max(max_layer, layer);
    out[idx] = {layer - 1, (m - m % 2) / 2};
  }
  if (max_layer > n) {
    throw SimulationError(
        "rectangular_decompose: internal scheduling overflow");
  }
  return out;
}

}  // namespace

MeshSettings rectangular_decompose(const ComplexMatrix& u) {
  const int n = static_cast<int>(u.rows());
  if (u.rows() != u.cols() || n < 2) {
    throw ValidationError(
        "rectangular_decompose: need a square matrix with N >= 2");
  }
  require_unitary(u, "rectangular_decompose");

  ComplexMatrix v = u;
  std::vector<BlockOp> rights;  // ops applied as V <- V * T^-1, in order
  std::vector<BlockOp> lefts;   // ops applied as V <- T * V, in order
  rights.reserve(static_cast<std::size_t>(n) * n / 2);
  lefts.reserve(static_cast<std::size_t>(n) * n / 2);
  for (int k = 0; k <= n - 2; ++k) {
    if (k % 2 == 0) {
      // Null the anti-diagonal starting at (n-1, k) via column ops.
      for (int j = 0; j <= k; ++j) {
        const BlockOp op = solve_right(v, n - 1 - j, k - j);
        apply_right_inverse(v, op);
        rights.push_back(op);
      }
    } else {
      // Null the anti-diagonal ending at (n-1, k) via row ops.
      for (int j = 1; j <= k + 1; ++j) {
        const BlockOp op = solve_left(v, j - 1, n + j - k - 3);
        apply_left(v, op);
        lefts.push_back(op);
      }
    }
  }

  // v is now diagonal up to rounding; keep only the phases.
  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) diag[i] = std::arg(v(i, i));

  // The factorization so far is U = L1^-1 ... LS^-1 * D * R_T ... R_1.
  // Push each left inverse through the diagonal, innermost first:
  //   T(theta,phi)^-1 * diag(e^{i mu}, e^{i nu})
  //     = diag(e^{i mu'}, e^{i nu'}) * T(theta, phi')
  // with phi' = mu - nu, mu' = nu - phi - theta + pi, nu' = nu - theta + pi.
  // A tie-break bar factor (theta == pi exactly) is itself diagonal; for it
  // the freedom is resolved as phi' = 0, mu' = mu - phi, nu' = nu, which
  // keeps decompositions of permutation-free inputs at phi = 0 throughout.
  std::vector<BlockOp> commuted(lefts.size());
  for (int s = static_cast<int>(lefts.size()) - 1; s >= 0; --s) {
    const BlockOp& op = lefts[s];
    const double mu = diag[op.mode];
    const double nu = diag[op.mode + 1];
    if (op.theta == kPi) {
      commuted[s] = {op.mode, kPi, 0.0};
      diag[op.mode] = mu - op.phi;
    } else {
      commuted[s] = {op.mode, op.theta, wrap_2pi(mu - nu)};
      diag[op.mode] = nu - op.phi - op.theta + kPi;
      diag[op.mode + 1] = nu - op.theta + kPi;
    }
  }

  // Full factor list of U = D * F_0 * F_1 * ... * F_{K-1}.
  std::vector<BlockOp> factors;
  factors.reserve(commuted.size() + rights.size());
  for (const BlockOp& op : commuted) factors.push_back(op);
  for (auto it = rights.rbegin(); it != rights.rend(); ++it) {
    factors.push_back(*it);
  }

  const auto positions = rectangle_schedule(n, factors);
  MeshSettings out;
  out.n_modes = n;
  out.layers.resize(n);
  std::vector<std::vector<bool>> filled(n);
  for (int l = 0; l < n; ++l) {
    out.layers[l].resize(layer_slots(n, l % 2));
    filled[l].resize(out.layers[l].size(), false);
  }
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const auto [layer, slot] = positions[i];
    if (layer >= n || slot >= static_cast<int>(out.layers[layer].size()) ||
        filled[layer][slot] || layer % 2 != factors[i].mode % 2) {
      throw SimulationError(
          "rectangular_decompose: internal scheduling conflict");
    }
    out.layers[layer][slot] =
        MZISetting{wrap_2pi(factors[i].theta), wrap_2pi(factors[i].phi)};
    filled[layer][slot] = true;
  }
  for (int l = 0; l < n; ++l) {
    for (bool f : filled[l]) {
      if (!f) {
        throw SimulationError(
            "rectangular_decompose: internal scheduling left a hole");
      }
    }
  }

  const double gamma = diag[0];
  out.global_phase = wrap_2pi(gamma);
  out.output_phases.resize(n);
  out.output_phases[0] = 0.0;
  for (int i = 1; i < n; ++i) out.output_phases[i] = wrap_2pi(diag[i] - gamma);
  return out;
}

void validate_settings(const MeshSettings& s) {
  const int n = s.n_modes;
  if (n < 2) {
    throw DimensionError("mesh settings: n_modes must be >= 2");
  }
  if (static_cast<int>(s.layers.size()) != n) {
    throw DimensionError("mesh settings: expected " + std::to_string(n) +
                         " layers, got " + std::to_string(s.layers.size()));
  }
  for (int l = 0; l < n; ++l) {
    const int want = layer_slots(n, l % 2);
    if (static_cast<int>(s.layers[l].size()) != want) {
      throw DimensionError("mesh settings: layer " + std::to_string(l) +
                           " must hold " + std::to_string(want) + " MZIs");
    }
  }
  if (static_cast<int>(s.output_phases.size()) != n) {
    throw DimensionError("mesh settings: output_phases must have one entry "
                         "per mode");
  }
}

ComplexMatrix reconstruct(const MeshSettings& settings, int n) {
  if (settings.n_modes != n) {
    throw DimensionError("reconstruct: settings are for " +
                         std::to_string(settings.n_modes) +
                         " modes, requested " + std::to_string(n));
  }
  validate_settings(settings);
  ComplexMatrix m = ComplexMatrix::Identity(n, n);
  for (int l = 0; l < n; ++l) {
    const int parity = l % 2;
    for (std::size_t s = 0; s < settings.layers[l].size(); ++s) {
      const int top = parity + 2 * static_cast<int>(s);
      const Eigen::Matrix2cd t = mzi_transfer(settings.layers[l][s],
                                              MZIHardware{});
      for (Eigen::Index j = 0; j < n; ++j) {
        const Complex a = m(top, j);
        const Complex b = m(top + 1, j);
        m(top, j) = t(0, 0) * a + t(0, 1) * b;
        m(top + 1, j) = t(1, 0) * a + t(1, 1) * b;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    m.row(i) *= std::polar(1.0, settings.global_phase +
                                    settings.output_phases[i]);
  }
  return m;
}

}  // namespace meshsim
