#include "meshsim/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace meshsim {

namespace {

std::string fmt(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out;
}

void append_row_major(std::string& out, const IntensityMatrix& m) {
  out += '[';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != 0 || j != 0) out += ',';
      out += fmt(m(i, j));
    }
  }
  out += ']';
}

void append_doubles(std::string& out, const std::vector<double>& values) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i != 0) out += ',';
    out += fmt(values[i]);
  }
  out += ']';
}

std::string heater_name(HeaterKind kind) {
  return kind == HeaterKind::internal ? "internal" : "external";
}

}  // namespace

std::string to_json(const ComplexMatrix& matrix) {
  std::string out = "{\"schema\":1,\"kind\":\"complex_matrix\",\"rows\":";
  out += std::to_string(matrix.rows());
  out += ",\"cols\":";
  out += std::to_string(matrix.cols());
  out += ",\"re\":[";
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (i != 0 || j != 0) out += ',';
      out += fmt(matrix(i, j).real());
    }
  }
  out += "],\"im\":[";
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (i != 0 || j != 0) out += ',';
      out += fmt(matrix(i, j).imag());
    }
  }
  out += "]}";
  return out;
}

std::string to_json(const IntensityMatrix& matrix) {
  std::string out = "{\"schema\":1,\"kind\":\"intensity_matrix\",\"rows\":";
  out += std::to_string(matrix.rows());
  out += ",\"cols\":";
  out += std::to_string(matrix.cols());
  out += ",\"values\":";
  append_row_major(out, matrix);
  out += '}';
  return out;
}

std::string to_json(const MeshSettings& settings) {
  std::string out = "{\"schema\":1,\"kind\":\"mesh_settings\",\"n_modes\":";
  out += std::to_string(settings.n_modes);
  out += ",\"global_phase\":";
  out += fmt(settings.global_phase);
  out += ",\"output_phases\":";
  append_doubles(out, settings.output_phases);
  out += ",\"layers\":[";
  for (std::size_t l = 0; l < settings.layers.size(); ++l) {
    if (l != 0) out += ',';
    out += "{\"parity\":";
    out += std::to_string(static_cast<int>(l % 2));
    out += ",\"mzis\":[";
    for (std::size_t s = 0; s < settings.layers[l].size(); ++s) {
      if (s != 0) out += ',';
      out += "{\"theta\":";
      out += fmt(settings.layers[l][s].theta);
      out += ",\"phi\":";
      out += fmt(settings.layers[l][s].phi);
      out += '}';
    }
    out += "]}";
  }
  out += "]}";
  return out;
}

std::string to_json(const CalibrationTable& table) {
  std::string out = "{\"schema\":1,\"kind\":\"calibration_table\",\"entries\":[";
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    const HeaterCalibration& e = table.entries[i];
    if (i != 0) out += ',';
    out += "{\"module\":";
    out += std::to_string(e.module);
    out += ",\"mzi\":";
    out += std::to_string(e.mzi);
    out += ",\"heater\":\"";
    out += heater_name(e.kind);
    out += "\",\"alpha\":";
    out += fmt(e.fit.alpha);
    out += ",\"fringe_phi0\":";
    out += fmt(e.fit.fringe_phi0);
    out += ",\"offset\":";
    out += fmt(e.fit.offset);
    out += ",\"amplitude\":";
    out += fmt(e.fit.amplitude);
    out += ",\"visibility\":";
    out += fmt(e.fit.visibility);
    out += ",\"rms_residual\":";
    out += fmt(e.fit.rms_residual);
    out += ",\"n_points\":";
    out += std::to_string(e.fit.n_points);
    if (std::isfinite(e.coupling_product)) {
      out += ",\"coupling_product\":";
      out += fmt(e.coupling_product);
    }
    out += '}';
  }
  out += "]}";
  return out;
}

std::string to_json(const SwitchResult& result) {
  std::string out = "{\"schema\":1,\"kind\":\"switch_report\",\"input\":";
  out += std::to_string(result.input);
  out += ",\"output\":";
  out += std::to_string(result.output);
  out += ",\"routed_fraction\":";
  out += fmt(result.routed_fraction);
  out += ",\"sweeps_used\":";
  out += std::to_string(result.sweeps_used);
  out += ",\"converged\":";
  out += result.converged ? "true" : "false";
  out += ",\"path\":[";
  for (std::size_t i = 0; i < result.path.size(); ++i) {
    if (i != 0) out += ',';
    out += "{\"module\":";
    out += std::to_string(result.path[i].module);
    out += ",\"mzi\":";
    out += std::to_string(result.path[i].mzi);
    out += ",\"cross\":";
    out += result.path[i].cross ? "true" : "false";
    out += '}';
  }
  out += "],\"intensities\":[";
  for (Eigen::Index i = 0; i < result.final_intensities.size(); ++i) {
    if (i != 0) out += ',';
    out += fmt(result.final_intensities(i));
  }
  out += "]}";
  return out;
}

std::string to_json(const TritterResult& result) {
  std::string out = "{\"schema\":1,\"kind\":\"tritter_report\",\"objective\":";
  out += fmt(result.objective);
  out += ",\"sweeps_used\":";
  out += std::to_string(result.sweeps_used);
  out += ",\"converged\":";
  out += result.converged ? "true" : "false";
  out += ",\"objective_trace\":";
  append_doubles(out, result.objective_trace);
  out += ",\"normalized\":";
  out += to_json(result.normalized);
  out += '}';
  return out;
}

std::string to_json(const ExperimentReport& report) {
  std::string out = "{\"schema\":1,\"kind\":\"experiment_report\",\"n_trials\":";
  out += std::to_string(report.n_trials);
  out += ",\"n_failed\":";
  out += std::to_string(report.n_failed);
  out += ",\"mean_fidelity\":";
  out += fmt(report.mean_fidelity);
  out += ",\"sd_fidelity\":";
  out += fmt(report.sd_fidelity);
  out += ",\"min_fidelity\":";
  out += fmt(report.min_fidelity);
  out += ",\"trials\":[";
  for (std::size_t i = 0; i < report.trials.size(); ++i) {
    const TrialRecord& t = report.trials[i];
    if (i != 0) out += ',';
    out += "{\"index\":";
    out += std::to_string(t.index);
    out += ",\"failed\":";
    out += t.failed ? "true" : "false";
    out += ",\"fidelity\":";
    out += fmt(t.fidelity);
    if (t.failed) {
      out += ",\"error\":\"";
      out += escape(t.error);
      out += '"';
    }
    out += ",\"target\":";
    out += to_json(t.target);
    out += ",\"settings\":";
    out += to_json(t.settings);
    out += ",\"measured\":";
    out += to_json(t.measured);
    out += '}';
  }
  out += "]}";
  return out;
}

std::string to_csv(const MeshSettings& settings) {
  std::string out = "# n_modes=" + std::to_string(settings.n_modes) + "\n";
  out += "# global_phase=" + fmt(settings.global_phase) + "\n";
  out += "# output_phases=";
  for (std::size_t i = 0; i < settings.output_phases.size(); ++i) {
    if (i != 0) out += ',';
    out += fmt(settings.output_phases[i]);
  }
  out += "\nlayer,slot,theta,phi\n";
  for (std::size_t l = 0; l < settings.layers.size(); ++l) {
    for (std::size_t s = 0; s < settings.layers[l].size(); ++s) {
      out += std::to_string(l) + ',' + std::to_string(s) + ',' +
             fmt(settings.layers[l][s].theta) + ',' +
             fmt(settings.layers[l][s].phi) + '\n';
    }
  }
  return out;
}

std::string to_csv(const ComplexMatrix& matrix) {
  std::string out = "row,col,re,im\n";
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      out += std::to_string(i) + ',' + std::to_string(j) + ',' +
             fmt(matrix(i, j).real()) + ',' + fmt(matrix(i, j).imag()) + '\n';
    }
  }
  return out;
}

std::string to_csv(const CalibrationTable& table) {
  std::string out =
      "module,mzi,heater,alpha_rad,phi0_rad,visibility,coupling_product\n";
  for (const HeaterCalibration& e : table.entries) {
    out += std::to_string(e.module) + ',' + std::to_string(e.mzi) + ',' +
           heater_name(e.kind) + ',' + fmt(e.fit.alpha) + ',' +
           fmt(e.fit.fringe_phi0) + ',' + fmt(e.fit.visibility) + ',';
    if (std::isfinite(e.coupling_product)) out += fmt(e.coupling_product);
    out += '\n';
  }
  return out;
}

std::string to_csv(const SwitchResult& result) {
  std::string out = "# input=" + std::to_string(result.input) + "\n";
  out += "# routed_fraction=" + fmt(result.routed_fraction) + "\n";
  out += "# sweeps_used=" + std::to_string(result.sweeps_used) + "\n";
  out += std::string("# converged=") + (result.converged ? "true" : "false") +
         "\n";
  out += "target_output,measured_output,intensity_normalized\n";
  const double total = result.final_intensities.sum();
  for (Eigen::Index i = 0; i < result.final_intensities.size(); ++i) {
    const double v = total > 0.0 ? result.final_intensities(i) / total : 0.0;
    out += std::to_string(result.output) + ',' + std::to_string(i) + ',' +
           fmt(v) + '\n';
  }
  return out;
}

std::string csv_intensities(const IntensityMatrix& matrix,
                            const std::vector<int>& inputs,
                            const std::vector<int>& outputs,
                            const std::string& value_header) {
  if (matrix.rows() != static_cast<Eigen::Index>(outputs.size()) ||
      matrix.cols() != static_cast<Eigen::Index>(inputs.size())) {
    throw DimensionError("csv_intensities: mode lists do not match matrix");
  }
  std::string out = "input,output," + value_header + "\n";
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
      out += std::to_string(inputs[static_cast<std::size_t>(j)]) + ',' +
             std::to_string(outputs[static_cast<std::size_t>(i)]) + ',' +
             fmt(matrix(i, j)) + '\n';
    }
  }
  return out;
}

std::string to_csv(const TritterResult& result, const std::vector<int>& io) {
  std::string out = "# objective=" + fmt(result.objective) + "\n";
  out += "# sweeps_used=" + std::to_string(result.sweeps_used) + "\n";
  out += std::string("# converged=") + (result.converged ? "true" : "false") +
         "\n";
  out += "# objective_trace=";
  for (std::size_t i = 0; i < result.objective_trace.size(); ++i) {
    if (i != 0) out += ',';
    out += fmt(result.objective_trace[i]);
  }
  out += '\n';
  out += csv_intensities(result.normalized, io, io, "intensity_normalized");
  return out;
}

std::string to_csv(const ExperimentReport& report) {
  std::string out = "# n_trials=" + std::to_string(report.n_trials) + "\n";
  out += "# n_failed=" + std::to_string(report.n_failed) + "\n";
  out += "# mean_fidelity=" + fmt(report.mean_fidelity) + "\n";
  out += "# sd_fidelity=" + fmt(report.sd_fidelity) + "\n";
  out += "# min_fidelity=" + fmt(report.min_fidelity) + "\n";
  out += "trial,fidelity\n";
  for (const TrialRecord& t : report.trials) {
    out += std::to_string(t.index) + ',' + fmt(t.fidelity) + '\n';
  }
  return out;
}

namespace {

using nlohmann::json;

json parse_checked(const std::string& text, const std::string& origin,
                   const std::string& kind) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": parse error: " + e.what());
  }
  if (!j.is_object()) throw ValidationError(origin + ": expected an object");
  if (!j.contains("schema") || !j.at("schema").is_number_integer() ||
      j.at("schema").get<int>() != 1) {
    throw ValidationError(origin + ": missing or unsupported \"schema\"");
  }
  if (!j.contains("kind") || !j.at("kind").is_string() ||
      j.at("kind").get<std::string>() != kind) {
    throw ValidationError(origin + ": expected \"kind\": \"" + kind + "\"");
  }
  return j;
}

std::vector<double> finite_array(const json& j, const std::string& key,
                                 const std::string& origin) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw ValidationError(origin + ": \"" + key + "\" must be an array");
  }
  std::vector<double> out;
  out.reserve(j.at(key).size());
  for (const json& v : j.at(key)) {
    if (!v.is_number()) {
      throw ValidationError(origin + ": \"" + key +
                            "\" must contain only numbers");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      throw ValidationError(origin + ": \"" + key + "\" contains a non-finite value");
    }
    out.push_back(d);
  }
  return out;
}

}  // namespace

ComplexMatrix matrix_from_json(const std::string& text,
                               const std::string& origin) {
  const json j = parse_checked(text, origin, "complex_matrix");
  if (!j.contains("rows") || !j.at("rows").is_number_integer() ||
      !j.contains("cols") || !j.at("cols").is_number_integer()) {
    throw ValidationError(origin + ": \"rows\"/\"cols\" must be integers");
  }
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  if (rows < 0 || cols < 0) {
    throw ValidationError(origin + ": negative matrix dimensions");
  }
  const std::vector<double> re = finite_array(j, "re", origin);
  const std::vector<double> im = finite_array(j, "im", origin);
  if (static_cast<Eigen::Index>(re.size()) != rows * cols ||
      static_cast<Eigen::Index>(im.size()) != rows * cols) {
    throw ValidationError(origin + ": rows*cols does not match re/im length");
  }
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const std::size_t k = static_cast<std::size_t>(i * cols + c);
      m(i, c) = Complex(re[k], im[k]);
    }
  }
  return m;
}

MeshSettings settings_from_json(const std::string& text,
                                const std::string& origin) {
  const json j = parse_checked(text, origin, "mesh_settings");
  if (!j.contains("n_modes") || !j.at("n_modes").is_number_integer()) {
    throw ValidationError(origin + ": \"n_modes\" must be an integer");
  }
  MeshSettings settings;
  settings.n_modes = j.at("n_modes").get<int>();
  if (!j.contains("global_phase") || !j.at("global_phase").is_number()) {
    throw ValidationError(origin + ": \"global_phase\" must be a number");
  }
  settings.global_phase = j.at("global_phase").get<double>();
  settings.output_phases = finite_array(j, "output_phases", origin);
  if (!j.contains("layers") || !j.at("layers").is_array()) {
    throw ValidationError(origin + ": \"layers\" must be an array");
  }
  for (const json& layer : j.at("layers")) {
    if (!layer.is_object() || !layer.contains("mzis") ||
        !layer.at("mzis").is_array()) {
      throw ValidationError(origin + ": each layer must carry an \"mzis\" array");
    }
    if (layer.contains("parity") &&
        (!layer.at("parity").is_number_integer() ||
         layer.at("parity").get<int>() !=
             static_cast<int>(settings.layers.size() % 2))) {
      throw ValidationError(origin + ": layer parity does not alternate from 0");
    }
    std::vector<MZISetting> row;
    for (const json& m : layer.at("mzis")) {
      if (!m.is_object() || !m.contains("theta") || !m.at("theta").is_number() ||
          !m.contains("phi") || !m.at("phi").is_number()) {
        throw ValidationError(origin + ": each MZI must carry numeric theta/phi");
      }
      MZISetting setting;
      setting.theta = m.at("theta").get<double>();
      setting.phi = m.at("phi").get<double>();
      if (!std::isfinite(setting.theta) || !std::isfinite(setting.phi)) {
        throw ValidationError(origin + ": non-finite phase in settings");
      }
      row.push_back(setting);
    }
    settings.layers.push_back(std::move(row));
  }
  try {
    validate_settings(settings);
  } catch (const ValidationError& e) {
    throw ValidationError(origin + ": " + e.what());
  }
  return settings;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError(path + ": cannot open file for writing");
  out << content;
  if (!out) throw ValidationError(path + ": write failed");
}

}  // namespace meshsim
