#include "meshsim/mzi.hpp"

#include <cmath>

namespace meshsim {

double db_to_amplitude(double db) { return std::pow(10.0, -db / 20.0); }

double db_to_power(double db) { return std::pow(10.0, -db / 10.0); }

Eigen::Matrix2cd coupler(double r) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw ValidationError("coupler: intensity ratio must lie in [0, 1]");
  }
  const double t = std::sqrt(r);
  const double k = std::sqrt(1.0 - r);
  Eigen::Matrix2cd c;
  c << Complex(t, 0.0), Complex(0.0, k), Complex(0.0, k), Complex(t, 0.0);
  return c;
}

Eigen::Matrix2cd mzi_transfer(const MZISetting& s, const MZIHardware& h) {
  if (!std::isfinite(s.theta) || !std::isfinite(s.phi)) {
    throw ValidationError("mzi_transfer: non-finite phase setting");
  }
  if (h.coupler_excess_loss_db < 0.0 || h.arm_loss_db < 0.0) {
    throw ValidationError("mzi_transfer: negative loss");
  }
  const Eigen::Matrix2cd c1 = coupler(h.r1);
  const Eigen::Matrix2cd c2 = coupler(h.r2);
  const Complex ei_theta = std::polar(1.0, s.theta);
  const Complex ei_phi = std::polar(1.0, s.phi);
  // C(r2) * P(theta) * C(r1) * P(phi), written out to avoid three 2x2
  // products in the innermost loop of mesh sweeps.
  Eigen::Matrix2cd m;
  m(0, 0) = c2(0, 0) * ei_theta * c1(0, 0) + c2(0, 1) * c1(1, 0);
  m(0, 1) = c2(0, 0) * ei_theta * c1(0, 1) + c2(0, 1) * c1(1, 1);
  m(1, 0) = c2(1, 0) * ei_theta * c1(0, 0) + c2(1, 1) * c1(1, 0);
  m(1, 1) = c2(1, 0) * ei_theta * c1(0, 1) + c2(1, 1) * c1(1, 1);
  m(0, 0) *= ei_phi;
  m(1, 0) *= ei_phi;
  const double amp =
      db_to_amplitude(2.0 * h.coupler_excess_loss_db + h.arm_loss_db);
  return amp * m;
}

}  // namespace meshsim
