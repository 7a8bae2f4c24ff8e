#pragma once

#include <cstdint>
#include <string>

#include "meshsim/device.hpp"
#include "meshsim/imperfections.hpp"

namespace meshsim {

/// Derivation streams hung off the config seed. Every stochastic stage
/// draws from its own stream so, e.g., adding measurement noise never
/// changes which hardware gets sampled.
inline constexpr std::uint64_t kSeedStreamHardware = 0;
inline constexpr std::uint64_t kSeedStreamExperiment = 1;
inline constexpr std::uint64_t kSeedStreamSimulate = 2;
inline constexpr std::uint64_t kSeedStreamCalibrate = 3;

/// Full description of a simulated device: geometry, drive electronics,
/// detection noise, imperfection statistics, and the master seed the
/// hardware sample is derived from. Defaults describe the reference
/// three-module, twenty-mode assembly.
struct DeviceConfig {
  int n_modes = 20;
  int n_modules = 3;
  int module_width = 10;
  int first_parity = 0;
  double chip_length_cm = 2.5;
  double noise_sigma = 0.005;
  std::uint64_t seed = 42;
  bool quantized_drive = true;
  bool push_pull = true;
  ImperfectionSpec imperfections = ImperfectionSpec::typical();
};

void validate_config(const DeviceConfig& config);

/// Parses a config from JSON text. Requires "schema": 1; every other key
/// is optional and falls back to the default. Unknown keys are rejected
/// by name. "imperfections" is either a preset name ("typical",
/// "nominal", "ideal") or an object of overrides, optionally carrying a
/// "preset" key naming the base the overrides apply to (default
/// "typical"). `origin` labels error messages (usually the file name).
DeviceConfig parse_config(const std::string& text, const std::string& origin);

/// parse_config on the contents of `path`.
DeviceConfig load_config(const std::string& path);

/// Samples the hardware the config describes (seed stream 0) and wraps
/// it in a Device with the configured drive electronics and noise.
Device make_device(const DeviceConfig& config);

}  // namespace meshsim
