#include "meshsim/assembly.hpp"

#include <cmath>
#include <string>

#include "meshsim/rng.hpp"

namespace meshsim {

namespace {

void check_module(const ChipModule& mod, int n_modes) {
  if (mod.width < 0 || static_cast<int>(mod.mzis.size()) != mod.width) {
    throw ValidationError("module: mzis size does not match width");
  }
  if (mod.parity != 0 && mod.parity != 1) {
    throw ValidationError("module: parity must be 0 or 1");
  }
  if (mod.pass_loss_db < 0.0) {
    throw ValidationError("module: negative pass-through loss");
  }
  if (n_modes < 1) {
    throw ValidationError("module: assembly must have at least one mode");
  }
}

void apply_module(const ChipModule& mod, int n_modes, Eigen::VectorXcd& v) {
  check_module(mod, n_modes);
  for (int m = 0; m < mod.width; ++m) {
    if (!mod.usable(m, n_modes)) continue;
    const int t = mod.top_mode(m);
    const Eigen::Matrix2cd u =
        mzi_transfer(mod.mzis[m].setting, mod.mzis[m].hw);
    const Complex a = v(t);
    const Complex b = v(t + 1);
    v(t) = u(0, 0) * a + u(0, 1) * b;
    v(t + 1) = u(1, 0) * a + u(1, 1) * b;
  }
  const double pass_amp = db_to_amplitude(mod.pass_loss_db);
  for (int mode = 0; mode < n_modes; ++mode) {
    if (mod.mzi_on_mode(mode, n_modes) < 0) v(mode) *= pass_amp;
  }
}

void check_assembly(const Assembly& a) {
  if (a.modules.empty()) {
    throw ValidationError("assembly: module list is empty");
  }
  if (a.n_modes < 1) {
    throw ValidationError("assembly: n_modes must be >= 1");
  }
  if (a.fiber_loss_db < 0.0 || a.interface_loss_db < 0.0) {
    throw ValidationError("assembly: negative loss");
  }
}

}  // namespace

ComplexMatrix module_transfer(const ChipModule& mod, int n_modes) {
  check_module(mod, n_modes);
  ComplexMatrix u(n_modes, n_modes);
  for (int j = 0; j < n_modes; ++j) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n_modes);
    v(j) = 1.0;
    apply_module(mod, n_modes, v);
    u.col(j) = v;
  }
  return u;
}

Eigen::VectorXcd propagate(const Assembly& a, const Eigen::VectorXcd& input) {
  check_assembly(a);
  if (input.size() != a.n_modes) {
    throw DimensionError("propagate: input vector has " +
                         std::to_string(input.size()) + " modes, assembly " +
                         std::to_string(a.n_modes));
  }
  const Complex fiber_amp(db_to_amplitude(a.fiber_loss_db), 0.0);
  const Complex iface_amp(db_to_amplitude(a.interface_loss_db), 0.0);
  Eigen::VectorXcd v = fiber_amp * input;
  for (std::size_t i = 0; i < a.modules.size(); ++i) {
    if (i > 0) v *= iface_amp;
    apply_module(a.modules[i], a.n_modes, v);
  }
  v *= fiber_amp;
  return v;
}

ComplexMatrix assembly_transfer(const Assembly& a) {
  check_assembly(a);
  ComplexMatrix u(a.n_modes, a.n_modes);
  for (int j = 0; j < a.n_modes; ++j) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(a.n_modes);
    e(j) = 1.0;
    u.col(j) = propagate(a, e);
  }
  return u;
}

Eigen::VectorXd measure_intensities(const Assembly& a,
                                    const Eigen::VectorXcd& input,
                                    const NoiseSpec& noise,
                                    std::uint64_t seed) {
  if (noise.sigma < 0.0) {
    throw ValidationError("measure_intensities: negative noise sigma");
  }
  const Eigen::VectorXcd out = propagate(a, input);
  Eigen::VectorXd p(out.size());
  for (Eigen::Index k = 0; k < out.size(); ++k) p(k) = std::norm(out(k));
  if (noise.sigma > 0.0) {
    Rng rng(seed);
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      p(k) = std::max(0.0, p(k) * (1.0 + noise.sigma * rng.gauss()));
    }
  }
  return p;
}

Eigen::VectorXd measure_intensities(const Assembly& a, int input_mode,
                                    const NoiseSpec& noise,
                                    std::uint64_t seed) {
  check_assembly(a);
  if (input_mode < 0 || input_mode >= a.n_modes) {
    throw IndexError("measure_intensities: input mode " +
                     std::to_string(input_mode) + " out of range");
  }
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(a.n_modes);
  e(input_mode) = 1.0;
  return measure_intensities(a, e, noise, seed);
}

}  // namespace meshsim
