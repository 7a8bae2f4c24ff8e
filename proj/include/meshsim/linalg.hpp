#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

#include "meshsim/errors.hpp"

namespace meshsim {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using IntensityMatrix = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Tolerance for treating a matrix as unitary (max-norm of U^dag U - I).
inline constexpr double kUnitarityTol = 1e-10;

/// Wraps a phase to the canonical range [0, 2*pi).
double wrap_2pi(double phase);

/// Wraps a phase to (-pi, pi].
double wrap_pm_pi(double phase);

/// Largest absolute entry.
double max_abs(const ComplexMatrix& m);

/// Max-norm of U^dag U - I; 0 for exactly unitary input.
double unitarity_deviation(const ComplexMatrix& u);

bool is_unitary(const ComplexMatrix& u, double tol = kUnitarityTol);

/// Throws ValidationError with `what` in the message unless u is square and
/// unitary within tol.
void require_unitary(const ComplexMatrix& u, const char* what,
                     double tol = kUnitarityTol);

/// Haar-distributed n x n unitary: complex Ginibre sample, QR, then the
/// R-diagonal phase fix that makes the distribution exactly invariant.
/// Deterministic in (n, seed).
ComplexMatrix haar_random_unitary(Eigen::Index n, std::uint64_t seed);

/// n x n identity with `block` substituted on modes (m, m+1).
ComplexMatrix embed_two_mode(Eigen::Index n, Eigen::Index m,
                             const Eigen::Matrix2cd& block);

/// Elementwise |u_ij|^2.
IntensityMatrix intensities(const ComplexMatrix& u);

/// Each column scaled to unit sum. Throws DegenerateMeasurementError if a
/// column sums to zero (or carries a negative entry).
IntensityMatrix column_normalized(const IntensityMatrix& p);

/// Classical amplitude fidelity between a measured intensity matrix and a
/// target unitary: mean over columns of sum_i sqrt(P_ij * Q_ij) with both
/// P (measured) and Q (|target|^2) column-normalized. 1.0 iff the
/// normalized intensity patterns agree exactly.
double amplitude_fidelity(const IntensityMatrix& measured,
                          const ComplexMatrix& target);

/// Unitary discrete-Fourier-transform matrix, entries exp(2*pi*i*j*k/n)/sqrt(n).
ComplexMatrix dft_matrix(Eigen::Index n);

}  // namespace meshsim
