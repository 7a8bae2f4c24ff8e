#include "meshsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "meshsim/rng.hpp"

namespace meshsim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw ConfigError(origin + ": " + what);
}

int line_of_offset(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

void reject_unknown_keys(const json& object, const std::set<std::string>& known,
                         const std::string& origin, const std::string& where) {
  for (const auto& item : object.items()) {
    if (!known.count(item.key())) {
      fail(origin, "unknown key \"" + item.key() + "\" in " + where);
    }
  }
}

double get_number(const json& object, const std::string& key, double fallback,
                  const std::string& origin) {
  if (!object.contains(key)) return fallback;
  const json& v = object.at(key);
  if (!v.is_number()) fail(origin, "\"" + key + "\" must be a number");
  return v.get<double>();
}

int get_int(const json& object, const std::string& key, int fallback,
            const std::string& origin) {
  if (!object.contains(key)) return fallback;
  const json& v = object.at(key);
  if (!v.is_number_integer()) fail(origin, "\"" + key + "\" must be an integer");
  return v.get<int>();
}

bool get_bool(const json& object, const std::string& key, bool fallback,
              const std::string& origin) {
  if (!object.contains(key)) return fallback;
  const json& v = object.at(key);
  if (!v.is_boolean()) fail(origin, "\"" + key + "\" must be a boolean");
  return v.get<bool>();
}

ImperfectionSpec preset_by_name(const std::string& name,
                                const std::string& origin) {
  if (name == "typical") return ImperfectionSpec::typical();
  if (name == "nominal") return ImperfectionSpec::nominal();
  if (name == "ideal") return ImperfectionSpec::ideal();
  fail(origin, "unknown imperfection preset \"" + name +
                   "\" (want typical, nominal, or ideal)");
}

ImperfectionSpec parse_imperfections(const json& v, const std::string& origin) {
  if (v.is_string()) return preset_by_name(v.get<std::string>(), origin);
  if (!v.is_object()) {
    fail(origin, "\"imperfections\" must be a preset name or an object");
  }
  ImperfectionSpec spec = ImperfectionSpec::typical();
  if (v.contains("preset")) {
    const json& p = v.at("preset");
    if (!p.is_string()) fail(origin, "\"preset\" must be a string");
    spec = preset_by_name(p.get<std::string>(), origin);
  }
  reject_unknown_keys(
      v,
      {"preset", "coupling_mean", "coupling_sd", "coupler_excess_db_mean",
       "coupler_excess_db_sd", "fiber_loss_db", "interface_loss_db",
       "propagation_db_per_cm", "tuning_range_pi_mean", "tuning_range_pi_sd",
       "crosstalk_neighbor", "crosstalk_next_nearest", "single_heater_factor"},
      origin, "\"imperfections\"");
  spec.coupling_mean = get_number(v, "coupling_mean", spec.coupling_mean, origin);
  spec.coupling_sd = get_number(v, "coupling_sd", spec.coupling_sd, origin);
  spec.coupler_excess_db_mean =
      get_number(v, "coupler_excess_db_mean", spec.coupler_excess_db_mean, origin);
  spec.coupler_excess_db_sd =
      get_number(v, "coupler_excess_db_sd", spec.coupler_excess_db_sd, origin);
  spec.fiber_loss_db = get_number(v, "fiber_loss_db", spec.fiber_loss_db, origin);
  spec.interface_loss_db =
      get_number(v, "interface_loss_db", spec.interface_loss_db, origin);
  spec.propagation_db_per_cm =
      get_number(v, "propagation_db_per_cm", spec.propagation_db_per_cm, origin);
  spec.tuning_range_pi_mean =
      get_number(v, "tuning_range_pi_mean", spec.tuning_range_pi_mean, origin);
  spec.tuning_range_pi_sd =
      get_number(v, "tuning_range_pi_sd", spec.tuning_range_pi_sd, origin);
  spec.crosstalk_neighbor =
      get_number(v, "crosstalk_neighbor", spec.crosstalk_neighbor, origin);
  spec.crosstalk_next_nearest =
      get_number(v, "crosstalk_next_nearest", spec.crosstalk_next_nearest, origin);
  spec.single_heater_factor =
      get_number(v, "single_heater_factor", spec.single_heater_factor, origin);
  return spec;
}

}  // namespace

void validate_config(const DeviceConfig& config) {
  if (config.n_modes < 2 || config.n_modes % 2 != 0) {
    throw ConfigError("n_modes must be an even number >= 2");
  }
  if (config.module_width < 1) {
    throw ConfigError("module_width must be >= 1");
  }
  if (config.n_modes != 2 * config.module_width) {
    throw ConfigError("n_modes must equal 2 * module_width");
  }
  if (config.n_modules < 1) {
    throw ConfigError("n_modules must be >= 1");
  }
  if (config.first_parity != 0 && config.first_parity != 1) {
    throw ConfigError("first_parity must be 0 or 1");
  }
  if (!(config.chip_length_cm >= 0.0) ||
      !std::isfinite(config.chip_length_cm)) {
    throw ConfigError("chip_length_cm must be finite and >= 0");
  }
  if (!(config.noise_sigma >= 0.0) || !std::isfinite(config.noise_sigma)) {
    throw ConfigError("noise_sigma must be finite and >= 0");
  }
  validate(config.imperfections);
}

DeviceConfig parse_config(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(origin + ":" + std::to_string(line_of_offset(text, e.byte)),
         std::string("parse error: ") + e.what());
  }
  if (!j.is_object()) fail(origin, "config must be a JSON object");
  if (!j.contains("schema")) fail(origin, "missing required key \"schema\"");
  if (!j.at("schema").is_number_integer() || j.at("schema").get<int>() != 1) {
    fail(origin, "unsupported schema (want \"schema\": 1)");
  }
  reject_unknown_keys(j,
                      {"schema", "n_modes", "n_modules", "module_width",
                       "first_parity", "chip_length_cm", "noise_sigma", "seed",
                       "quantized_drive", "push_pull", "imperfections"},
                      origin, "config");

  DeviceConfig config;
  config.n_modes = get_int(j, "n_modes", config.n_modes, origin);
  config.n_modules = get_int(j, "n_modules", config.n_modules, origin);
  config.module_width = get_int(j, "module_width", config.module_width, origin);
  if (j.contains("n_modes") && !j.contains("module_width")) {
    config.module_width = config.n_modes / 2;  // keep the pair consistent
  }
  config.first_parity = get_int(j, "first_parity", config.first_parity, origin);
  config.chip_length_cm =
      get_number(j, "chip_length_cm", config.chip_length_cm, origin);
  config.noise_sigma = get_number(j, "noise_sigma", config.noise_sigma, origin);
  if (j.contains("seed")) {
    const json& v = j.at("seed");
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<long long>() < 0)) {
      fail(origin, "\"seed\" must be a nonnegative integer");
    }
    config.seed = v.get<std::uint64_t>();
  }
  config.quantized_drive =
      get_bool(j, "quantized_drive", config.quantized_drive, origin);
  config.push_pull = get_bool(j, "push_pull", config.push_pull, origin);
  if (j.contains("imperfections")) {
    config.imperfections = parse_imperfections(j.at("imperfections"), origin);
  }
  try {
    validate_config(config);
  } catch (const ConfigError& e) {
    fail(origin, e.what());
  }
  return config;
}

DeviceConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

Device make_device(const DeviceConfig& config) {
  validate_config(config);
  AssemblyLayout layout;
  layout.n_modes = config.n_modes;
  layout.n_modules = config.n_modules;
  layout.module_width = config.module_width;
  layout.first_parity = config.first_parity;
  layout.chip_length_cm = config.chip_length_cm;
  const Assembly assembly = sample_hardware(
      config.imperfections, layout, derive_seed(config.seed, kSeedStreamHardware));
  DriveMode drive;
  drive.quantized = config.quantized_drive;
  drive.push_pull = config.push_pull;
  return Device(assembly, config.imperfections, drive, config.noise_sigma);
}

}  // namespace meshsim
