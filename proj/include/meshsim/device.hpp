#pragma once

#include <cstdint>

#include "meshsim/assembly.hpp"
#include "meshsim/imperfections.hpp"

namespace meshsim {

enum class HeaterKind { internal, external };

struct DriveMode {
  bool quantized = true;  // 8-bit words; false = continuous analog drive
  bool push_pull = true;  // constant-total-power heater pairs
};

/// A fabricated assembly as the experimenter sees it: phases are commanded
/// through drive words and tuning curves, crosstalk distorts what the
/// heaters realize, measurements carry multiplicative noise. The true
/// hardware parameters stay inside; the command interface only accepts
/// target phases plus whatever fitted curve the experimenter provides
/// (nominal design curve when none is given).
class Device {
 public:
  Device(Assembly assembly, ImperfectionSpec spec, DriveMode drive,
         double noise_sigma);

  int n_modes() const { return assembly_.n_modes; }
  int n_modules() const { return static_cast<int>(assembly_.modules.size()); }
  const DriveMode& drive() const { return drive_; }
  void set_push_pull(bool on) { drive_.push_pull = on; }
  double noise_sigma() const { return noise_sigma_; }

  /// True hardware state; read access for tests and reports.
  const Assembly& assembly() const { return assembly_; }
  Assembly& assembly() { return assembly_; }

  /// Sets every heater of every MZI to zero drive (word levels/2).
  void park_all_zero();

  /// Applies a drive word directly; the heater realizes its true curve.
  void set_word(int module, int mzi, HeaterKind kind, int word);

  /// Commands a target phase through `inversion` (the curve the experimenter
  /// believes; nominal design curve if null). Quantized mode rounds to the
  /// nearest word of the inversion curve and the true curve realizes that
  /// word; continuous mode actuates the exact normalized power the inversion
  /// requests. Throws UnreachablePhaseError when no wrap of the target fits.
  void set_phase(int module, int mzi, HeaterKind kind, double target,
                 const TuningCurve* inversion = nullptr);

  /// Phase the hardware currently realizes (before crosstalk).
  double realized_phase(int module, int mzi, HeaterKind kind) const;

  /// Copy of the assembly with crosstalk folded into the settings; what the
  /// light actually sees.
  Assembly effective_assembly() const;

  /// Output intensities for unit input on one mode.
  Eigen::VectorXd measure(int input_mode, std::uint64_t seed) const;

  /// Output intensities for an arbitrary coherent input field.
  Eigen::VectorXd measure_coherent(const Eigen::VectorXcd& input,
                                   std::uint64_t seed) const;

 private:
  const MziUnit& unit(int module, int mzi) const;
  MziUnit& unit(int module, int mzi);
  const TuningCurve& true_curve(int module, int mzi, HeaterKind kind) const;
  void store_phase(int module, int mzi, HeaterKind kind, double realized);

  Assembly assembly_;
  ImperfectionSpec spec_;
  DriveMode drive_;
  double noise_sigma_ = 0.0;
};

/// RAII snapshot of all MZI settings; restores them on destruction.
/// Calibration scans use it so probing leaves the device configured as
/// found.
class SettingsGuard {
 public:
  explicit SettingsGuard(Device& dev);
  SettingsGuard(const SettingsGuard&) = delete;
  SettingsGuard& operator=(const SettingsGuard&) = delete;
  ~SettingsGuard();

 private:
  Device& dev_;
  std::vector<std::vector<MZISetting>> saved_;
  bool saved_push_pull_;
};

}  // namespace meshsim
