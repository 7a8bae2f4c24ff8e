#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "meshsim/cli.hpp"
#include "meshsim/linalg.hpp"
#include "meshsim/protocols.hpp"
#include "meshsim/serialize.hpp"
#include "test_util.hpp"

using namespace meshsim;

namespace {

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "meshsim_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string scratch_file(const std::string& name) {
  return (scratch_dir() / name).string();
}

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("complex matrices survive a JSON round trip bit for bit") {
  const ComplexMatrix u = haar_random_unitary(5, 321);
  const ComplexMatrix back = matrix_from_json(to_json(u), "test");
  CHECK(max_abs(back - u) == 0.0);
}

TEST_CASE("mesh settings survive a JSON round trip") {
  const MeshSettings s = rectangular_decompose(haar_random_unitary(4, 17));
  const MeshSettings back = settings_from_json(to_json(s), "test");
  CHECK(back.n_modes == s.n_modes);
  CHECK(back.global_phase == s.global_phase);
  for (int l = 0; l < 4; ++l) {
    REQUIRE(back.layers[l].size() == s.layers[l].size());
    for (std::size_t k = 0; k < s.layers[l].size(); ++k) {
      CHECK(back.layers[l][k].theta == s.layers[l][k].theta);
      CHECK(back.layers[l][k].phi == s.layers[l][k].phi);
    }
  }
  CHECK(max_abs(reconstruct(back, 4) - reconstruct(s, 4)) == 0.0);
}

TEST_CASE("JSON readers reject malformed input") {
  const ComplexMatrix u = haar_random_unitary(3, 1);
  const MeshSettings s = rectangular_decompose(u);
  // Wrong kind for the reader.
  CHECK_THROWS_AS(matrix_from_json(to_json(s), "t"), ValidationError);
  CHECK_THROWS_AS(settings_from_json(to_json(u), "t"), ValidationError);
  // Truncated and non-JSON payloads.
  const std::string good = to_json(u);
  CHECK_THROWS_AS(matrix_from_json(good.substr(0, good.size() / 2), "t"),
                  ValidationError);
  CHECK_THROWS_AS(matrix_from_json("not json at all", "t"), ValidationError);
  // Shape mismatch: drop one entry from the re array.
  std::string short_re = good;
  const auto pos = short_re.find("\"re\":[");
  REQUIRE(pos != std::string::npos);
  const auto comma = short_re.find(',', pos + 6);
  short_re.erase(pos + 6, comma - (pos + 6) + 1);
  CHECK_THROWS_AS(matrix_from_json(short_re, "t"), ValidationError);
}

TEST_CASE("reports serialize failed trials and CSV summaries") {
  ExperimentReport report;
  report.n_trials = 2;
  report.n_failed = 1;
  report.mean_fidelity = 0.97;
  report.sd_fidelity = 0.0;
  report.min_fidelity = 0.97;
  TrialRecord ok;
  ok.index = 0;
  ok.target = dft_matrix(3);
  ok.settings = rectangular_decompose(ok.target);
  ok.measured = intensities(ok.target);
  ok.fidelity = 0.97;
  TrialRecord bad;
  bad.index = 1;
  bad.failed = true;
  bad.error = "synthetic failure";
  report.trials = {ok, bad};

  const std::string json = to_json(report);
  CHECK(json.find("\"n_failed\":1") != std::string::npos);
  CHECK(json.find("\"failed\":true") != std::string::npos);
  CHECK(json.find("synthetic failure") != std::string::npos);

  const std::string csv = to_csv(report);
  CHECK(csv.rfind("#", 0) == 0);
  CHECK(csv.find("trial,fidelity") != std::string::npos);
  CHECK(csv.find("\n1,0\n") != std::string::npos);  // failed trial scores 0
}

TEST_CASE("decompose and reconstruct round trip through the CLI") {
  const ComplexMatrix u = dft_matrix(3);
  const std::string matrix_path = scratch_file("dft3.json");
  const std::string settings_path = scratch_file("dft3_settings.json");
  const std::string back_path = scratch_file("dft3_back.json");
  write_text_file(matrix_path, to_json(u));

  const CliRun dec = cli({"decompose", matrix_path, "--out", settings_path});
  CHECK(dec.code == 0);
  CHECK(dec.err.empty());

  const CliRun rec = cli({"reconstruct", settings_path, "--out", back_path});
  CHECK(rec.code == 0);

  const ComplexMatrix back =
      matrix_from_json(read_text_file(back_path), back_path);
  CHECK(max_abs(back - u) < 1e-8);
}

TEST_CASE("CLI prints help and rejects bad usage") {
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"--help"}).out.find("decompose") != std::string::npos);
  CHECK(cli({}).code == 1);                      // a subcommand is required
  CHECK(cli({"decompose"}).code == 1);           // missing matrix argument
  CHECK(cli({"switch", "--input", "4"}).code == 1);  // missing --output
  CHECK(cli({"frobnicate"}).code == 1);
  const CliRun bad_format =
      cli({"tritter", "--format", "yaml", "--sweeps", "1"});
  CHECK(bad_format.code == 1);
  CHECK(!bad_format.err.empty());
}

TEST_CASE("CLI maps input problems to exit code 1") {
  CHECK(cli({"decompose", scratch_file("missing.json")}).code == 1);

  ComplexMatrix not_unitary = ComplexMatrix::Identity(3, 3);
  not_unitary(0, 0) = 2.0;
  const std::string bad_matrix = scratch_file("bad_matrix.json");
  write_text_file(bad_matrix, to_json(not_unitary));
  const CliRun r = cli({"decompose", bad_matrix});
  CHECK(r.code == 1);
  CHECK(r.err.find("unitary") != std::string::npos);

  // Unknown config keys are named in the error.
  const std::string bad_config = scratch_file("bad_config.json");
  write_text_file(bad_config, "{\"schema\": 1, \"bogus\": 3}\n");
  const CliRun c = cli({"simulate", "--config", bad_config});
  CHECK(c.code == 1);
  CHECK(c.err.find("bogus") != std::string::npos);

  // Unroutable switch request: modes too far apart for three modules.
  CHECK(cli({"switch", "--input", "0", "--output", "19"}).code == 1);
}

TEST_CASE("CLI maps simulation failures to exit code 2") {
  // A 1.5 pi heater span cannot cover a full fringe, so calibration fails
  // while the request itself is well-formed.
  const std::string narrow = scratch_file("narrow_config.json");
  write_text_file(narrow,
                  "{\"schema\": 1, \"noise_sigma\": 0.0,"
                  " \"quantized_drive\": false,"
                  " \"imperfections\": {\"preset\": \"nominal\","
                  " \"tuning_range_pi_mean\": 1.5}}\n");
  const CliRun r = cli({"calibrate", "--config", narrow, "--points", "64"});
  CHECK(r.code == 2);
  CHECK(!r.err.empty());
}

TEST_CASE("CLI output is byte-reproducible for a fixed seed") {
  const std::vector<std::string> sw = {"switch", "--input", "4", "--output",
                                       "6"};
  const CliRun a = cli(sw);
  const CliRun b = cli(sw);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);

  const std::vector<std::string> exp = {"experiment", "--trials", "4",
                                        "--points", "32", "--serial"};
  const CliRun c = cli(exp);
  const CliRun d = cli(exp);
  CHECK(c.code == 0);
  CHECK(c.out == d.out);

  std::vector<std::string> reseeded = exp;
  reseeded.push_back("--seed");
  reseeded.push_back("7");
  const CliRun e = cli(reseeded);
  CHECK(e.code == 0);
  CHECK(e.out != c.out);
}

TEST_CASE("CLI emits CSV when asked") {
  const std::string matrix_path = scratch_file("csv_matrix.json");
  write_text_file(matrix_path, to_json(dft_matrix(3)));
  const CliRun dec = cli({"decompose", matrix_path, "--format", "csv"});
  CHECK(dec.code == 0);
  CHECK(dec.out.rfind("#", 0) == 0);
  CHECK(dec.out.find("layer,slot,theta,phi") != std::string::npos);

  const CliRun sim = cli({"simulate", "--format", "csv"});
  CHECK(sim.code == 0);
  CHECK(sim.out.find("input,output,intensity") != std::string::npos);
}

TEST_CASE("simulate accepts settings plus calibration") {
  const std::string cfg = scratch_file("ideal_config.json");
  write_text_file(cfg,
                  "{\"schema\": 1, \"noise_sigma\": 0.0,"
                  " \"quantized_drive\": false,"
                  " \"imperfections\": \"ideal\"}\n");
  const std::string settings_path = scratch_file("tritter_settings.json");
  write_text_file(settings_path, to_json(rectangular_decompose(dft_matrix(3))));

  const std::vector<std::string> args = {"simulate",   "--config",
                                         cfg,          "--settings",
                                         settings_path, "--calibrate",
                                         "--points",   "64"};
  const CliRun r = cli(args);
  CHECK(r.code == 0);
  CHECK(r.err.empty());
  CHECK(r.out.find("\"kind\":\"intensity_matrix\"") != std::string::npos);
  CHECK(cli(args).out == r.out);
}
