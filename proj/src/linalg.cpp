#include "meshsim/linalg.hpp"

#include <cmath>
#include <string>

#include "meshsim/rng.hpp"

namespace meshsim {

double wrap_2pi(double phase) {
  double r = phase - kTwoPi * std::floor(phase / kTwoPi);
  if (r >= kTwoPi) r -= kTwoPi;  // floor rounding can land exactly on 2*pi
  if (r < 0.0) r = 0.0;
  return r;
}

double wrap_pm_pi(double phase) {
  const double r = wrap_2pi(phase);
  return r > kPi ? r - kTwoPi : r;
}

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double unitarity_deviation(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) {
    throw DimensionError("unitarity_deviation: matrix is not square");
  }
  ComplexMatrix d = u.adjoint() * u;
  d.diagonal().array() -= 1.0;
  return max_abs(d);
}

bool is_unitary(const ComplexMatrix& u, double tol) {
  return u.rows() == u.cols() && unitarity_deviation(u) <= tol;
}

void require_unitary(const ComplexMatrix& u, const char* what, double tol) {
  if (u.rows() != u.cols()) {
    throw ValidationError(std::string(what) + ": matrix is not square");
  }
  const double dev = unitarity_deviation(u);
  if (!(dev <= tol)) {
    throw ValidationError(std::string(what) +
                          ": matrix is not unitary (deviation " +
                          std::to_string(dev) + ")");
  }
}

ComplexMatrix haar_random_unitary(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw DimensionError("haar_random_unitary: n must be >= 1");
  Rng rng(seed);
  ComplexMatrix z(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double re = rng.gauss();
      const double im = rng.gauss();
      z(i, j) = Complex(re, im);
    }
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  // Fixing the phases of R's diagonal removes the QR gauge freedom; without
  // it the distribution is not Haar.
  const auto r_diag = qr.matrixQR().diagonal();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex d = r_diag(k);
    const double a = std::abs(d);
    q.col(k) *= (a == 0.0) ? Complex(1.0, 0.0) : d / a;
  }
  return q;
}

ComplexMatrix embed_two_mode(Eigen::Index n, Eigen::Index m,
                             const Eigen::Matrix2cd& block) {
  if (n < 2) throw DimensionError("embed_two_mode: n must be >= 2");
  if (m < 0 || m + 1 >= n) {
    throw IndexError("embed_two_mode: mode pair (" + std::to_string(m) + ", " +
                     std::to_string(m + 1) + ") out of range for n = " +
                     std::to_string(n));
  }
  ComplexMatrix u = ComplexMatrix::Identity(n, n);
  u(m, m) = block(0, 0);
  u(m, m + 1) = block(0, 1);
  u(m + 1, m) = block(1, 0);
  u(m + 1, m + 1) = block(1, 1);
  return u;
}

IntensityMatrix intensities(const ComplexMatrix& u) { return u.cwiseAbs2(); }

IntensityMatrix column_normalized(const IntensityMatrix& p) {
  IntensityMatrix out = p;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    if ((p.col(j).array() < 0.0).any()) {
      throw DegenerateMeasurementError(
          "column_normalized: negative intensity in column " +
          std::to_string(j));
    }
    const double s = p.col(j).sum();
    if (!(s > 0.0)) {
      throw DegenerateMeasurementError(
          "column_normalized: column " + std::to_string(j) +
          " has zero total intensity");
    }
    out.col(j) /= s;
  }
  return out;
}

double amplitude_fidelity(const IntensityMatrix& measured,
                          const ComplexMatrix& target) {
  if (measured.rows() != target.rows() || measured.cols() != target.cols()) {
    throw DimensionError("amplitude_fidelity: shape mismatch");
  }
  if (measured.rows() == 0) {
    throw DimensionError("amplitude_fidelity: empty matrix");
  }
  const IntensityMatrix p = column_normalized(measured);
  const IntensityMatrix q = column_normalized(intensities(target));
  const double total = (p.array() * q.array()).sqrt().sum();
  return total / static_cast<double>(p.cols());
}

ComplexMatrix dft_matrix(Eigen::Index n) {
  if (n < 1) throw DimensionError("dft_matrix: n must be >= 1");
  ComplexMatrix f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double ang = kTwoPi * static_cast<double>(j) *
                         static_cast<double>(k) / static_cast<double>(n);
      f(j, k) = scale * Complex(std::cos(ang), std::sin(ang));
    }
  }
  return f;
}

}  // namespace meshsim
