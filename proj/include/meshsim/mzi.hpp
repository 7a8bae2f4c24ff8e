#pragma once

#include <Eigen/Dense>

#include "meshsim/linalg.hpp"

namespace meshsim {

/// Phase settings of one MZI, radians. theta is the internal (differential
/// arm) phase controlling the splitting ratio; phi is the external phase on
/// the top input arm. Canonical storage range is [0, 2*pi) after wrapping.
struct MZISetting {
  double theta = 0.0;
  double phi = 0.0;
};

/// Static hardware parameters of one MZI. r1/r2 are the intensity coupling
/// ratios of the input and output couplers (0.5 = ideal 50:50); losses in dB.
struct MZIHardware {
  double r1 = 0.5;
  double r2 = 0.5;
  double coupler_excess_loss_db = 0.0;  // per coupler
  double arm_loss_db = 0.0;             // propagation through the MZI
};

/// Field amplitude factor for a dB power loss: 10^(-db/20).
double db_to_amplitude(double db);

/// Power transmission for a dB loss: 10^(-db/10).
double db_to_power(double db);

/// Transfer matrix of a fixed-ratio coupler:
/// [[sqrt(r), i*sqrt(1-r)], [i*sqrt(1-r), sqrt(r)]].
Eigen::Matrix2cd coupler(double r);

/// Full MZI transfer: C(r2) * P(theta) * C(r1) * P(phi) with
/// P(x) = diag(e^{ix}, 1), scaled by the amplitude factor of
/// 2*coupler_excess_loss_db + arm_loss_db. With ideal couplers this equals
/// i*e^{i theta/2} * [[e^{i phi} sin(theta/2), cos(theta/2)],
///                    [e^{i phi} cos(theta/2), -sin(theta/2)]],
/// so theta = pi is the bar state (diag(-1, 1)) and theta = 0 the cross
/// state, with top-left intensity sin^2(theta/2).
Eigen::Matrix2cd mzi_transfer(const MZISetting& s, const MZIHardware& h);

}  // namespace meshsim
