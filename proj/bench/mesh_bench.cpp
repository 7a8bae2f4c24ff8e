// Timing harness comparing the serial reference experiment driver with
// the OpenMP one, plus a decomposition throughput sweep. Not a test; run
// manually via the meshsim_bench target.
#include <chrono>
#include <cstdio>

#include <omp.h>

#include "meshsim/config.hpp"
#include "meshsim/protocols.hpp"
#include "meshsim/rng.hpp"
#include "meshsim/serialize.hpp"

using namespace meshsim;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace

int main() {
  std::printf("threads available: %d\n", omp_get_max_threads());

  const DeviceConfig config;  // reference three-module device
  const Device prototype = make_device(config);
  const std::uint64_t seed = derive_seed(config.seed, kSeedStreamExperiment);
  const int trials = 40;

  ExperimentOptions serial_opts;
  serial_opts.policy = ExecutionPolicy::serial;
  auto t0 = std::chrono::steady_clock::now();
  const ExperimentReport serial_report =
      run_universal_experiment(prototype, trials, seed, serial_opts);
  const double serial_s = seconds_since(t0);

  ExperimentOptions parallel_opts;
  parallel_opts.policy = ExecutionPolicy::parallel;
  t0 = std::chrono::steady_clock::now();
  const ExperimentReport parallel_report =
      run_universal_experiment(prototype, trials, seed, parallel_opts);
  const double parallel_s = seconds_since(t0);

  std::printf("experiment, %d trials: serial %.3fs, parallel %.3fs (x%.2f)\n",
              trials, serial_s, parallel_s, serial_s / parallel_s);
  std::printf("mean fidelity %.6f\n", serial_report.mean_fidelity);
  if (to_json(serial_report) != to_json(parallel_report)) {
    std::printf("MISMATCH: serial and parallel reports differ\n");
    return 1;
  }
  std::printf("serial and parallel reports are byte-identical\n");

  for (const int n : {8, 12, 16, 20}) {
    const int reps = 50;
    t0 = std::chrono::steady_clock::now();
    double checksum = 0.0;
    for (int r = 0; r < reps; ++r) {
      const ComplexMatrix u = haar_random_unitary(
          n, derive_seed(0xb3ac5u, static_cast<std::uint64_t>(n * 1000 + r)));
      const MeshSettings settings = rectangular_decompose(u);
      checksum += settings.global_phase;
    }
    const double dt = seconds_since(t0);
    std::printf("decompose n=%2d: %7.3f ms/run (checksum %.3f)\n", n,
                1e3 * dt / reps, checksum);
  }
  return 0;
}
