#include <doctest.h>

#include <cmath>
#include <vector>

#include "meshsim/drive.hpp"
#include "meshsim/imperfections.hpp"
#include "meshsim/linalg.hpp"

using namespace meshsim;

TEST_CASE("imperfection presets") {
  const ImperfectionSpec t = ImperfectionSpec::typical();
  CHECK(t.coupling_mean == 0.57);
  CHECK(t.coupling_sd == 0.04);
  CHECK(t.coupler_excess_db_mean == 2.1);
  CHECK(t.crosstalk_neighbor == 0.01);
  CHECK(t.crosstalk_next_nearest == 0.007);
  CHECK(t.single_heater_factor == 2.0);
  CHECK(t.tuning_range_pi_mean == 2.7);

  const ImperfectionSpec n = ImperfectionSpec::nominal();
  CHECK(n.coupling_mean == 0.57);
  CHECK(n.coupling_sd == 0.0);
  CHECK(n.coupler_excess_db_sd == 0.0);
  CHECK(n.tuning_range_pi_sd == 0.0);
  CHECK(n.crosstalk_neighbor == 0.01);  // crosstalk is kept, only spreads go

  const ImperfectionSpec i = ImperfectionSpec::ideal();
  CHECK(i.coupling_mean == 0.5);
  CHECK(i.coupler_excess_db_mean == 0.0);
  CHECK(i.fiber_loss_db == 0.0);
  CHECK(i.interface_loss_db == 0.0);
  CHECK(i.propagation_db_per_cm == 0.0);
  CHECK(i.crosstalk_neighbor == 0.0);
  CHECK(i.crosstalk_next_nearest == 0.0);

  CHECK_NOTHROW(validate(t));
  CHECK_NOTHROW(validate(n));
  CHECK_NOTHROW(validate(i));
}

TEST_CASE("validate rejects out-of-range parameters") {
  ImperfectionSpec s;
  s.coupling_mean = -0.1;
  CHECK_THROWS_AS(validate(s), ValidationError);
  s = ImperfectionSpec{};
  s.coupling_mean = 1.1;
  CHECK_THROWS_AS(validate(s), ValidationError);
  s = ImperfectionSpec{};
  s.fiber_loss_db = -0.5;
  CHECK_THROWS_AS(validate(s), ValidationError);
  s = ImperfectionSpec{};
  s.tuning_range_pi_mean = 0.0;
  CHECK_THROWS_AS(validate(s), ValidationError);
  s = ImperfectionSpec{};
  s.crosstalk_neighbor = -0.01;
  CHECK_THROWS_AS(validate(s), ValidationError);
}

TEST_CASE("sample_hardware is deterministic and respects the layout") {
  const AssemblyLayout layout;  // 20 modes, 3 modules, width 10
  const ImperfectionSpec spec = ImperfectionSpec::typical();
  const Assembly a = sample_hardware(spec, layout, 42);
  const Assembly b = sample_hardware(spec, layout, 42);
  const Assembly c = sample_hardware(spec, layout, 43);

  CHECK(a.n_modes == 20);
  CHECK(a.modules.size() == 3);
  CHECK(a.fiber_loss_db == spec.fiber_loss_db);
  CHECK(a.interface_loss_db == spec.interface_loss_db);
  for (int m = 0; m < 3; ++m) {
    CHECK(a.modules[m].width == 10);
    CHECK(a.modules[m].parity == m % 2);
    CHECK(a.modules[m].pass_loss_db ==
          doctest::Approx(0.35 * 2.5).epsilon(1e-15));
  }

  bool identical = true, differs = false;
  for (int m = 0; m < 3; ++m) {
    for (int k = 0; k < 10; ++k) {
      const MziUnit& ua = a.modules[m].mzis[k];
      const MziUnit& ub = b.modules[m].mzis[k];
      const MziUnit& uc = c.modules[m].mzis[k];
      identical = identical && ua.hw.r1 == ub.hw.r1 && ua.hw.r2 == ub.hw.r2 &&
                  ua.hw.coupler_excess_loss_db == ub.hw.coupler_excess_loss_db &&
                  ua.internal_curve.alpha == ub.internal_curve.alpha &&
                  ua.external_curve.alpha == ub.external_curve.alpha;
      differs = differs || ua.hw.r1 != uc.hw.r1;
      CHECK(ua.setting.theta == 0.0);
      CHECK(ua.setting.phi == 0.0);
    }
  }
  CHECK(identical);
  CHECK(differs);
}

TEST_CASE("sample_hardware truncates couplings into [0, 1]") {
  ImperfectionSpec wild;
  wild.coupling_mean = 0.5;
  wild.coupling_sd = 10.0;
  const Assembly a = sample_hardware(wild, AssemblyLayout{}, 7);
  for (const ChipModule& mod : a.modules) {
    for (const MziUnit& u : mod.mzis) {
      CHECK(u.hw.r1 >= 0.0);
      CHECK(u.hw.r1 <= 1.0);
      CHECK(u.hw.r2 >= 0.0);
      CHECK(u.hw.r2 <= 1.0);
      CHECK(u.hw.coupler_excess_loss_db >= 0.0);
      CHECK(u.internal_curve.alpha >= 0.0);
    }
  }
}

TEST_CASE("nominal hardware is exact and spread-free") {
  const Assembly a =
      sample_hardware(ImperfectionSpec::nominal(), AssemblyLayout{}, 1);
  const Assembly b =
      sample_hardware(ImperfectionSpec::nominal(), AssemblyLayout{}, 999);
  for (int m = 0; m < 3; ++m) {
    for (int k = 0; k < 10; ++k) {
      const MziUnit& u = a.modules[m].mzis[k];
      CHECK(u.hw.r1 == 0.57);
      CHECK(u.hw.r2 == 0.57);
      CHECK(u.hw.coupler_excess_loss_db == 2.1);
      CHECK(u.internal_curve.alpha == doctest::Approx(2.7 * kPi));
      CHECK(u.external_curve.alpha == doctest::Approx(2.7 * kPi));
      // Different seeds sample the same deterministic hardware.
      CHECK(u.hw.r1 == b.modules[m].mzis[k].hw.r1);
    }
  }
}

TEST_CASE("sample_hardware rejects a bad layout") {
  AssemblyLayout layout;
  layout.n_modules = 0;
  CHECK_THROWS_AS(sample_hardware(ImperfectionSpec::typical(), layout, 1),
                  ValidationError);
  layout = AssemblyLayout{};
  layout.first_parity = 2;
  CHECK_THROWS_AS(sample_hardware(ImperfectionSpec::typical(), layout, 1),
                  ValidationError);
}

TEST_CASE("apply_crosstalk is a banded superposition") {
  const ImperfectionSpec spec = ImperfectionSpec::typical();
  const std::vector<double> cmd = {1.0, 0.0, 0.0, 2.0, 0.0};

  SUBCASE("push-pull coefficients") {
    const std::vector<double> eff = apply_crosstalk(cmd, spec, true);
    CHECK(eff[0] == doctest::Approx(1.0 + 0.01 * 0.0 + 0.007 * 0.0));
    CHECK(eff[1] == doctest::Approx(0.01 * 1.0 + 0.007 * 2.0));
    CHECK(eff[2] == doctest::Approx(0.01 * 2.0 + 0.007 * 1.0));
    CHECK(eff[3] == doctest::Approx(2.0));
    CHECK(eff[4] == doctest::Approx(0.01 * 2.0));  // only |i-j|=1 in range
  }
  SUBCASE("single-heater drive doubles every coefficient") {
    const std::vector<double> pp = apply_crosstalk(cmd, spec, true);
    const std::vector<double> sh = apply_crosstalk(cmd, spec, false);
    for (std::size_t j = 0; j < cmd.size(); ++j) {
      const double pp_pick = pp[j] - cmd[j];
      const double sh_pick = sh[j] - cmd[j];
      CHECK(sh_pick == doctest::Approx(2.0 * pp_pick).epsilon(1e-12));
    }
  }
  SUBCASE("superposition in the aggressor phases") {
    std::vector<double> only_a = {1.0, 0.0, 0.0, 0.0, 0.0};
    std::vector<double> only_b = {0.0, 0.0, 0.0, 2.0, 0.0};
    const std::vector<double> ea = apply_crosstalk(only_a, spec, true);
    const std::vector<double> eb = apply_crosstalk(only_b, spec, true);
    const std::vector<double> eab = apply_crosstalk(cmd, spec, true);
    for (std::size_t j = 0; j < cmd.size(); ++j) {
      const double pick_a = ea[j] - only_a[j];
      const double pick_b = eb[j] - only_b[j];
      CHECK(eab[j] - cmd[j] == doctest::Approx(pick_a + pick_b).epsilon(1e-12));
    }
  }
  SUBCASE("zero coefficients leave the command unchanged") {
    const std::vector<double> eff =
        apply_crosstalk(cmd, ImperfectionSpec::ideal(), false);
    for (std::size_t j = 0; j < cmd.size(); ++j) CHECK(eff[j] == cmd[j]);
  }
}

TEST_CASE("drive_power and curve_phase") {
  CHECK(drive_power(kZeroWord) == 0.0);
  CHECK(drive_power(0) == doctest::Approx(-128.0 / 255.0));
  CHECK(drive_power(255) == doctest::Approx(127.0 / 255.0));
  const TuningCurve curve{2.0, 0.5, 2.0, kDriveLevels};
  CHECK(curve_phase(curve, kZeroWord) == doctest::Approx(0.5));
  CHECK(curve_phase(curve, 255) ==
        doctest::Approx(0.5 + 2.0 * 127.0 / 255.0));
  CHECK_THROWS_AS(curve_phase(curve, -1), IndexError);
  CHECK_THROWS_AS(curve_phase(curve, 256), IndexError);
}

TEST_CASE("quantize_drive rounds to the nearest representable phase") {
  const TuningCurve curve;  // 2.7*pi span, zero offset
  const double step = curve.alpha / (kDriveLevels - 1);

  SUBCASE("zero word actuates exactly zero phase") {
    const DriveResult r = quantize_drive(0.0, curve);
    CHECK(r.word == kZeroWord);
    CHECK(r.realized_phase == 0.0);
  }
  SUBCASE("quantization error is bounded by half a step") {
    for (double target = -1.3 * kPi; target <= 1.3 * kPi; target += 0.0173) {
      const DriveResult r = quantize_drive(target, curve);
      CHECK(r.word >= 0);
      CHECK(r.word < kDriveLevels);
      CHECK(curve_phase(curve, r.word) ==
            doctest::Approx(r.realized_phase).epsilon(1e-12));
      // Compare against the best wrap of the target.
      double err = std::abs(wrap_pm_pi(r.realized_phase - target));
      CHECK(err <= step / 2.0 + 1e-12);
    }
  }
  SUBCASE("targets beyond the span wrap by 2*pi") {
    const DriveResult lo = quantize_drive(0.3, curve);
    const DriveResult hi = quantize_drive(0.3 + kTwoPi, curve);
    const DriveResult dn = quantize_drive(0.3 - kTwoPi, curve);
    CHECK(lo.word == hi.word);
    CHECK(lo.word == dn.word);
  }
  SUBCASE("a span below 2*pi leaves some phases unreachable") {
    const double alpha = 1.9 * kPi;
    const TuningCurve narrow{alpha, 0.0, alpha, kDriveLevels};
    CHECK_THROWS_AS(quantize_drive(kPi, narrow), UnreachablePhaseError);
    CHECK_NOTHROW(quantize_drive(0.9 * kPi, narrow));
    CHECK_NOTHROW(quantize_drive(-0.9 * kPi, narrow));
  }
}

TEST_CASE("continuous_phase actuates reachable targets exactly") {
  const TuningCurve curve;
  for (double target : {0.0, 0.4, -1.2, 3.0, -3.1}) {
    CHECK(continuous_phase(target, curve) ==
          doctest::Approx(target).epsilon(1e-12));
  }
  // Out-of-span targets pick the wrapped representative.
  const double far = 0.3 + kTwoPi;
  CHECK(continuous_phase(far, curve) == doctest::Approx(0.3).epsilon(1e-12));
  const double alpha = 1.9 * kPi;
  const TuningCurve narrow{alpha, 0.0, alpha, kDriveLevels};
  CHECK_THROWS_AS(continuous_phase(kPi, narrow), UnreachablePhaseError);
}
