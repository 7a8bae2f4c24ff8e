#pragma once

#include <string>
#include <vector>

#include "meshsim/calibration.hpp"
#include "meshsim/decompose.hpp"
#include "meshsim/linalg.hpp"
#include "meshsim/protocols.hpp"

namespace meshsim {

/// JSON writers. Output is byte-stable across runs and platforms: keys
/// are emitted in a fixed order and numbers are printed with %.17g
/// (round-trip exact for doubles). Non-finite values become null.
std::string to_json(const ComplexMatrix& matrix);
std::string to_json(const IntensityMatrix& matrix);
std::string to_json(const MeshSettings& settings);
std::string to_json(const CalibrationTable& table);
std::string to_json(const SwitchResult& result);
std::string to_json(const TritterResult& result);
std::string to_json(const ExperimentReport& report);

/// CSV writers. Each starts with '#' metadata lines, then a header row.
std::string to_csv(const MeshSettings& settings);
std::string to_csv(const ComplexMatrix& matrix);
std::string to_csv(const CalibrationTable& table);
std::string to_csv(const SwitchResult& result);
std::string csv_intensities(const IntensityMatrix& matrix,
                            const std::vector<int>& inputs,
                            const std::vector<int>& outputs,
                            const std::string& value_header = "intensity");
std::string to_csv(const TritterResult& result, const std::vector<int>& io);
std::string to_csv(const ExperimentReport& report);

/// JSON readers. Validate schema, kind, and shapes; throw ValidationError
/// with `origin` in the message on any mismatch.
ComplexMatrix matrix_from_json(const std::string& text,
                               const std::string& origin);
MeshSettings settings_from_json(const std::string& text,
                                const std::string& origin);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace meshsim
