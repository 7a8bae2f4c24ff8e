#include "meshsim/device.hpp"

#include <string>
#include <utility>

namespace meshsim {

Device::Device(Assembly assembly, ImperfectionSpec spec, DriveMode drive,
               double noise_sigma)
    : assembly_(std::move(assembly)),
      spec_(spec),
      drive_(drive),
      noise_sigma_(noise_sigma) {
  validate(spec_);
  if (noise_sigma_ < 0.0) {
    throw ValidationError("device: negative noise sigma");
  }
  if (assembly_.modules.empty()) {
    throw ValidationError("device: assembly has no modules");
  }
}

const MziUnit& Device::unit(int module, int mzi) const {
  if (module < 0 || module >= n_modules()) {
    throw IndexError("device: module " + std::to_string(module) +
                     " out of range");
  }
  const ChipModule& mod = assembly_.modules[module];
  if (mzi < 0 || mzi >= mod.width) {
    throw IndexError("device: MZI " + std::to_string(mzi) +
                     " out of range in module " + std::to_string(module));
  }
  return mod.mzis[mzi];
}

MziUnit& Device::unit(int module, int mzi) {
  return const_cast<MziUnit&>(
      static_cast<const Device*>(this)->unit(module, mzi));
}

const TuningCurve& Device::true_curve(int module, int mzi,
                                      HeaterKind kind) const {
  const MziUnit& u = unit(module, mzi);
  return kind == HeaterKind::internal ? u.internal_curve : u.external_curve;
}

void Device::store_phase(int module, int mzi, HeaterKind kind,
                         double realized) {
  MziUnit& u = unit(module, mzi);
  if (kind == HeaterKind::internal) {
    u.setting.theta = wrap_2pi(realized);
  } else {
    u.setting.phi = wrap_2pi(realized);
  }
}

void Device::park_all_zero() {
  for (int m = 0; m < n_modules(); ++m) {
    for (int k = 0; k < assembly_.modules[m].width; ++k) {
      set_word(m, k, HeaterKind::internal, kZeroWord);
      set_word(m, k, HeaterKind::external, kZeroWord);
    }
  }
}

void Device::set_word(int module, int mzi, HeaterKind kind, int word) {
  const TuningCurve& curve = true_curve(module, mzi, kind);
  store_phase(module, mzi, kind, curve_phase(curve, word));
}

void Device::set_phase(int module, int mzi, HeaterKind kind, double target,
                       const TuningCurve* inversion) {
  const TuningCurve nominal{};
  const TuningCurve& inv = inversion ? *inversion : nominal;
  const TuningCurve& truth = true_curve(module, mzi, kind);
  if (drive_.quantized) {
    const DriveResult dr = quantize_drive(target, inv);
    store_phase(module, mzi, kind, curve_phase(truth, dr.word));
  } else {
    // Continuous drive: the controller actuates the exact normalized power
    // the inversion curve asks for; the true curve decides what that power
    // realizes. Identical curves make the target exact.
    const double commanded = continuous_phase(target, inv);
    const double power = (commanded - inv.phi0) / inv.alpha;
    store_phase(module, mzi, kind, truth.phi0 + truth.alpha * power);
  }
}

double Device::realized_phase(int module, int mzi, HeaterKind kind) const {
  const MziUnit& u = unit(module, mzi);
  return kind == HeaterKind::internal ? u.setting.theta : u.setting.phi;
}

Assembly Device::effective_assembly() const {
  Assembly eff = assembly_;
  for (ChipModule& mod : eff.modules) {
    std::vector<double> thetas(mod.mzis.size());
    std::vector<double> phis(mod.mzis.size());
    for (std::size_t i = 0; i < mod.mzis.size(); ++i) {
      thetas[i] = mod.mzis[i].setting.theta;
      phis[i] = mod.mzis[i].setting.phi;
    }
    const auto eff_theta = apply_crosstalk(thetas, spec_, drive_.push_pull);
    const auto eff_phi = apply_crosstalk(phis, spec_, drive_.push_pull);
    for (std::size_t i = 0; i < mod.mzis.size(); ++i) {
      mod.mzis[i].setting.theta = eff_theta[i];
      mod.mzis[i].setting.phi = eff_phi[i];
    }
  }
  return eff;
}

Eigen::VectorXd Device::measure(int input_mode, std::uint64_t seed) const {
  return measure_intensities(effective_assembly(), input_mode,
                             NoiseSpec{noise_sigma_}, seed);
}

Eigen::VectorXd Device::measure_coherent(const Eigen::VectorXcd& input,
                                         std::uint64_t seed) const {
  return measure_intensities(effective_assembly(), input,
                             NoiseSpec{noise_sigma_}, seed);
}

SettingsGuard::SettingsGuard(Device& dev)
    : dev_(dev), saved_push_pull_(dev.drive().push_pull) {
  saved_.reserve(dev_.assembly().modules.size());
  for (const ChipModule& mod : dev_.assembly().modules) {
    std::vector<MZISetting> row;
    row.reserve(mod.mzis.size());
    for (const MziUnit& u : mod.mzis) row.push_back(u.setting);
    saved_.push_back(std::move(row));
  }
}

SettingsGuard::~SettingsGuard() {
  for (std::size_t m = 0; m < saved_.size(); ++m) {
    ChipModule& mod = dev_.assembly().modules[m];
    for (std::size_t i = 0; i < saved_[m].size(); ++i) {
      mod.mzis[i].setting = saved_[m][i];
    }
  }
  dev_.set_push_pull(saved_push_pull_);
}

}  // namespace meshsim
