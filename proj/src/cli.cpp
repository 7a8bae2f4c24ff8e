#include "meshsim/cli.hpp"

#include <CLI11.hpp>

#include "meshsim/config.hpp"
#include "meshsim/protocols.hpp"
#include "meshsim/rng.hpp"
#include "meshsim/serialize.hpp"

namespace meshsim {

namespace {

void emit(const std::string& content, const std::string& out_path,
          std::ostream& out) {
  std::string text = content;
  if (text.empty() || text.back() != '\n') text += '\n';
  if (out_path.empty()) {
    out << text;
  } else {
    write_text_file(out_path, text);
  }
}

std::vector<int> all_modes(int n) {
  std::vector<int> modes(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) modes[static_cast<std::size_t>(i)] = i;
  return modes;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Simulator and compiler for modular programmable "
               "interferometer meshes"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string format = "json";
  std::uint64_t seed_override = 0;
  app.add_option("--config", config_path, "Device config JSON file");
  auto* seed_opt =
      app.add_option("--seed", seed_override, "Override the config seed");
  app.add_option("--out", out_path, "Write the result here instead of stdout");
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));

  std::string matrix_path;
  auto* cmd_decompose = app.add_subcommand(
      "decompose", "Compile a unitary into rectangular mesh settings");
  cmd_decompose->add_option("matrix", matrix_path, "Unitary as matrix JSON")
      ->required();

  std::string settings_path;
  auto* cmd_reconstruct = app.add_subcommand(
      "reconstruct", "Rebuild the unitary a settings file describes");
  cmd_reconstruct->add_option("settings", settings_path, "Mesh settings JSON")
      ->required();

  std::string sim_settings_path;
  bool sim_calibrate = false;
  int sim_points = 256;
  auto* cmd_simulate = app.add_subcommand(
      "simulate", "Measure the device's full intensity transfer matrix");
  cmd_simulate->add_option("--settings", sim_settings_path,
                           "Program these mesh settings first");
  cmd_simulate->add_flag("--calibrate", sim_calibrate,
                         "Calibrate the mesh before programming");
  cmd_simulate->add_option("--points", sim_points,
                           "Points per calibration fringe scan");

  int cal_mesh_size = 3;
  int cal_points = 256;
  auto* cmd_calibrate = app.add_subcommand(
      "calibrate", "Fit tuning curves for the central mesh heaters");
  cmd_calibrate->add_option("--mesh-size", cal_mesh_size,
                            "Width of the centrally placed mesh");
  cmd_calibrate->add_option("--points", cal_points,
                            "Points per fringe scan");

  int sw_input = 0;
  int sw_output = 0;
  int sw_sweeps = 3;
  auto* cmd_switch = app.add_subcommand(
      "switch", "Route one input to one output and optimize the path");
  cmd_switch->add_option("--input", sw_input, "Input mode")->required();
  cmd_switch->add_option("--output", sw_output, "Output mode")->required();
  cmd_switch->add_option("--sweeps", sw_sweeps, "Optimization sweep budget");

  int tri_sweeps = 5;
  double tri_tol = 1e-6;
  auto* cmd_tritter = app.add_subcommand(
      "tritter", "Self-configure the central 3x3 mesh into a balanced splitter");
  cmd_tritter->add_option("--sweeps", tri_sweeps, "Optimization sweep budget");
  cmd_tritter->add_option("--tol", tri_tol,
                          "Minimum per-sweep objective improvement");

  int exp_trials = 50;
  int exp_mesh_size = 3;
  int exp_points = 256;
  bool exp_serial = false;
  auto* cmd_experiment = app.add_subcommand(
      "experiment", "Program and measure a batch of random target unitaries");
  cmd_experiment->add_option("--trials", exp_trials, "Number of targets");
  cmd_experiment->add_option("--mesh-size", exp_mesh_size,
                             "Width of the embedded mesh");
  cmd_experiment->add_option("--points", exp_points,
                             "Points per calibration fringe scan");
  cmd_experiment->add_flag("--serial", exp_serial,
                           "Run trials serially instead of in parallel");

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("meshsim");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    DeviceConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    if (seed_opt->count() > 0) config.seed = seed_override;
    const bool csv = format == "csv";

    if (*cmd_decompose) {
      const ComplexMatrix u =
          matrix_from_json(read_text_file(matrix_path), matrix_path);
      const MeshSettings settings = rectangular_decompose(u);
      emit(csv ? to_csv(settings) : to_json(settings), out_path, out);
      return 0;
    }

    if (*cmd_reconstruct) {
      const MeshSettings settings =
          settings_from_json(read_text_file(settings_path), settings_path);
      const ComplexMatrix u = reconstruct(settings, settings.n_modes);
      emit(csv ? to_csv(u) : to_json(u), out_path, out);
      return 0;
    }

    Device dev = make_device(config);

    if (*cmd_simulate) {
      if (!sim_settings_path.empty()) {
        const MeshSettings settings = settings_from_json(
            read_text_file(sim_settings_path), sim_settings_path);
        const MeshPlacement placement =
            make_central_placement(dev.assembly(), settings.n_modes);
        CalibrationTable table;
        if (sim_calibrate) {
          table = calibrate_mesh(dev, placement, sim_points,
                                 derive_seed(config.seed, kSeedStreamCalibrate));
        }
        program_mesh(dev, settings, placement,
                     sim_calibrate ? &table : nullptr);
      }
      const std::vector<int> modes = all_modes(dev.n_modes());
      const IntensityMatrix measured = measure_transfer_matrix(
          dev, modes, modes, derive_seed(config.seed, kSeedStreamSimulate));
      emit(csv ? csv_intensities(measured, modes, modes) : to_json(measured),
           out_path, out);
      return 0;
    }

    if (*cmd_calibrate) {
      const MeshPlacement placement =
          make_central_placement(dev.assembly(), cal_mesh_size);
      const CalibrationTable table = calibrate_mesh(
          dev, placement, cal_points,
          derive_seed(config.seed, kSeedStreamCalibrate));
      emit(csv ? to_csv(table) : to_json(table), out_path, out);
      return 0;
    }

    if (*cmd_switch) {
      const SwitchResult result =
          configure_switch(dev, sw_input, sw_output, sw_sweeps,
                           derive_seed(config.seed, kSeedStreamExperiment));
      emit(csv ? to_csv(result) : to_json(result), out_path, out);
      return 0;
    }

    if (*cmd_tritter) {
      const TritterResult result =
          self_configure_tritter(dev, tri_sweeps,
                                 derive_seed(config.seed, kSeedStreamExperiment),
                                 tri_tol);
      const std::vector<int> io =
          make_central_placement(dev.assembly(), 3).io_modes();
      emit(csv ? to_csv(result, io) : to_json(result), out_path, out);
      return 0;
    }

    if (*cmd_experiment) {
      ExperimentOptions options;
      options.scan_points = exp_points;
      options.mesh_size = exp_mesh_size;
      options.policy =
          exp_serial ? ExecutionPolicy::serial : ExecutionPolicy::parallel;
      const ExperimentReport report = run_universal_experiment(
          dev, exp_trials, derive_seed(config.seed, kSeedStreamExperiment),
          options);
      emit(csv ? to_csv(report) : to_json(report), out_path, out);
      return 0;
    }

    err << "error: no command selected\n";
    return 1;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const SimulationError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace meshsim
