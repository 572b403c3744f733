#include "zkroa/integrate.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "zkroa/systems.hpp"

namespace zkroa {
namespace {

using testutil::Rng;

void expect_clipped_invariants(const ClippedTrajectory& t, const SystemSpec& sys) {
  const int n = static_cast<int>(t.times.size());
  EXPECT_EQ(t.integrals[0], 0.0);
  for (int j = 0; j < n; ++j) {
    EXPECT_TRUE(sys.region.contains(t.states.row(j).transpose()))
        << "state outside region at step " << j;
    if (j > 0) EXPECT_GE(t.integrals[j], t.integrals[j - 1]);
  }
  if (t.exited) {
    ASSERT_TRUE(t.exit_index.has_value());
    ASSERT_TRUE(t.boundary_point.has_value());
    for (int j = *t.exit_index; j < n; ++j) {
      EXPECT_EQ((t.states.row(j).transpose() - *t.boundary_point).norm(), 0.0);
    }
  }
}

TEST(Integrate, LinearDecayMatchesExactSolution) {
  const SystemSpec sys = testutil::linear_decay(1);
  Vec x0(1);
  x0[0] = 1.0;
  const RawTrajectory t = simulate_augmented(sys, x0, 1.0, 1001);
  EXPECT_NEAR(t.states(1000, 0), std::exp(-1.0), 1e-10);
  EXPECT_EQ(t.states(0, 0), 1.0);
  EXPECT_EQ(t.integrals[0], 0.0);
}

TEST(Integrate, EquilibriumStaysFixed) {
  const SystemSpec sys = builtin(BenchmarkId::cubic1d);
  const RawTrajectory t = simulate_augmented(sys, sys.x_eq, 1.0, 101);
  for (int j = 0; j < 101; ++j) {
    EXPECT_EQ(t.states(j, 0), 0.0);
    EXPECT_EQ(t.integrals[j], 0.0);
  }
}

TEST(Integrate, RepellingStartIncreasesAndMatchesEulerOracle) {
  // |x| > 1 repels outward for the cubic system. Short horizon: the true
  // solution from 1.2 blows up in finite time (~0.59), so strict growth is
  // checked on [0, 0.4] against a dense Euler oracle.
  const SystemSpec sys = builtin(BenchmarkId::cubic1d);
  Vec x0(1);
  x0[0] = 1.2;
  const RawTrajectory t = simulate_augmented(sys, x0, 0.4, 401);
  for (int j = 1; j <= 400; ++j) {
    EXPECT_GT(t.states(j, 0), t.states(j - 1, 0));
  }
  double x = 1.2;
  const double h = 1e-5;
  for (int i = 0; i < 40000; ++i) x += h * (-x + x * x * x);
  EXPECT_NEAR(t.states(400, 0), x, 1e-3);
}

TEST(Integrate, RepellingStartOverLongHorizonBlowsUpWithIndex) {
  // Over the full unit horizon the unclipped cubic trajectory from 1.2
  // overflows; the error must carry the failing step.
  const SystemSpec sys = builtin(BenchmarkId::cubic1d);
  Vec x0(1);
  x0[0] = 1.2;
  try {
    simulate_augmented(sys, x0, 1.0, 1001);
    FAIL() << "expected IntegrationBlowup";
  } catch (const IntegrationBlowup& e) {
    EXPECT_GT(e.step_index, 0);
    EXPECT_LT(e.step_index, 1001);
  }
}

TEST(Integrate, BadArgumentsAreConfigErrors) {
  const SystemSpec sys = builtin(BenchmarkId::cubic1d);
  Vec x0(1);
  x0[0] = 0.5;
  EXPECT_THROW(simulate_augmented(sys, x0, 1.0, 1), ConfigError);
  EXPECT_THROW(simulate_augmented(sys, x0, 0.0, 11), ConfigError);
}

TEST(Clip, FullyInsideIsUnchanged) {
  const SystemSpec sys = builtin(BenchmarkId::cubic1d);
  Vec x0(1);
  x0[0] = 0.5;
  RawTrajectory raw = simulate_augmented(sys, x0, 1.0, 101);
  const Mat states_before = raw.states;
  const ClippedTrajectory t = clip_to_region(std::move(raw), sys);
  EXPECT_FALSE(t.exited);
  EXPECT_EQ((t.states - states_before).norm(), 0.0);
  expect_clipped_invariants(t, sys);
}

TEST(Clip, ExitForcedTrajectoryFreezesAtBoundary) {
  const SystemSpec sys = builtin(BenchmarkId::cubic1d);
  Vec x0(1);
  x0[0] = 1.4;
  const ClippedTrajectory t = simulate_clipped(sys, x0, 1.0, 1001);
  EXPECT_TRUE(t.exited);
  ASSERT_TRUE(t.boundary_point.has_value());
  EXPECT_EQ((*t.boundary_point)[0], 1.5);
  EXPECT_EQ(t.states(1000, 0), 1.5);
  expect_clipped_invariants(t, sys);
  // integral accrues at rate eta(1.5) = 1.5 after the exit
  const int iota = *t.exit_index;
  const double h = t.times[1] - t.times[0];
  EXPECT_NEAR(t.integrals[1000],
              t.integrals[iota - 1] + (1000 - iota + 1) * 1.5 * h, 1e-12);
}

TEST(Clip, SyntheticSegmentIntersection) {
  const SystemSpec sys = builtin(BenchmarkId::vdp_reversed);
  Vec p(2), q(2);
  p << 2.9, 0.0;
  q << 3.2, 0.0;
  const Vec sect = box_segment_intersection(sys.region, p, q);
  EXPECT_EQ(sect[0], 3.0);
  EXPECT_EQ(sect[1], 0.0);
}

TEST(Clip, StartOutsideRegionIsPreconditionViolation) {
  const SystemSpec sys = builtin(BenchmarkId::cubic1d);
  RawTrajectory raw;
  raw.times = Vec::LinSpaced(3, 0.0, 0.2);
  raw.states.resize(3, 1);
  raw.states << 2.0, 2.1, 2.2;
  raw.integrals = Vec::Zero(3);
  EXPECT_THROW(clip_to_region(std::move(raw), sys), ConfigError);
}

TEST(Clip, FusedPathMatchesSimulateThenClip) {
  const SystemSpec sys = builtin(BenchmarkId::vdp_reversed);
  Rng rng(11);
  int compared = 0;
  for (int i = 0; i < 20; ++i) {
    const Vec x0 = rng.point_in(sys.region);
    const ClippedTrajectory a = simulate_clipped(sys, x0, 1.5, 301);
    expect_clipped_invariants(a, sys);
    try {
      const ClippedTrajectory b =
          clip_to_region(simulate_augmented(sys, x0, 1.5, 301), sys);
      EXPECT_EQ((a.states - b.states).norm(), 0.0);
      EXPECT_EQ((a.integrals - b.integrals).norm(), 0.0);
      EXPECT_EQ(a.exited, b.exited);
      ++compared;
    } catch (const IntegrationBlowup&) {
      // The unclipped trajectory overflowed after leaving the region; the
      // stopped flow must still be well defined, frozen at the boundary.
      EXPECT_TRUE(a.exited);
    }
  }
  EXPECT_GE(compared, 5);  // most draws stay finite and are compared bitwise
}

TEST(EvaluateTDelta, UnitObservableAtEquilibrium) {
  const SystemSpec sys = builtin(BenchmarkId::cubic1d);
  const auto unit_obs = [](const Vec& x) {
    return Complex(std::exp(-x.squaredNorm() / 4.0), 0.0);
  };
  const Complex v = evaluate_T_delta(sys, unit_obs, sys.x_eq, 1.0, 101);
  EXPECT_EQ(v.real(), 1.0);
  EXPECT_EQ(v.imag(), 0.0);
}

TEST(EvaluateTDelta, ClosedFormIsFixedPoint) {
  const SystemSpec sys = builtin(BenchmarkId::cubic1d);
  const auto obs = [](const Vec& x) {
    return Complex(closed_form_u_1d(x[0]), 0.0);
  };
  Vec x(1);
  x[0] = 0.5;
  const Complex v = evaluate_T_delta(sys, obs, x, 1.0, 1001);
  EXPECT_NEAR(v.real(), closed_form_u_1d(0.5), 1e-4);
}

TEST(EvaluateTDelta, BoundaryWithOutwardFlow) {
  // Starting on the boundary with outward flow: the stopped trajectory is
  // constant, so the result is exp(-eta(x) * dt) * obs(x).
  const SystemSpec sys = builtin(BenchmarkId::cubic1d);
  Vec x(1);
  x[0] = 1.5;
  const auto obs = [](const Vec&) { return Complex(1.0, 0.0); };
  const Complex v = evaluate_T_delta(sys, obs, x, 1.0, 1001);
  EXPECT_NEAR(v.real(), std::exp(-1.5), 1e-12);
}

TEST(Integrate, Rk4FourthOrderConvergence) {
  const SystemSpec sys = testutil::linear_decay(1);
  Vec x0(1);
  x0[0] = 1.0;
  const double exact = std::exp(-1.0);
  double err[3];
  const int steps[3] = {101, 201, 401};  // dt = 1e-2, 5e-3, 2.5e-3
  for (int i = 0; i < 3; ++i) {
    const RawTrajectory t = simulate_augmented(sys, x0, 1.0, steps[i]);
    err[i] = std::abs(t.states(steps[i] - 1, 0) - exact);
  }
  EXPECT_GE(err[0] / err[1], 12.0);
  EXPECT_GE(err[1] / err[2], 12.0);
}

TEST(Integrate, SemigroupCompositionOnData) {
  // T over 2*dt equals T over dt applied to y -> T obs(y), within 1e-3.
  struct Case {
    SystemSpec sys;
    double dt;
    int nsteps;
  };
  std::vector<Case> cases;
  cases.push_back({builtin(BenchmarkId::cubic1d), 0.5, 501});
  cases.push_back({builtin(BenchmarkId::vdp_reversed), 0.75, 751});
  for (const auto& c : cases) {
    const auto obs = [&](const Vec& x) {
      return Complex(std::exp(-(x - c.sys.x_eq).squaredNorm() / 4.0), 0.0);
    };
    const auto inner = [&](const Vec& y) {
      return evaluate_T_delta(c.sys, obs, y, c.dt, c.nsteps);
    };
    Rng rng(77);
    for (int i = 0; i < 100; ++i) {
      const Vec x = rng.point_in(c.sys.region);
      const Complex two_step =
          evaluate_T_delta(c.sys, obs, x, 2.0 * c.dt, 2 * c.nsteps - 1);
      const Complex composed = evaluate_T_delta(c.sys, inner, x, c.dt, c.nsteps);
      EXPECT_NEAR(std::abs(two_step - composed), 0.0, 1e-3)
          << c.sys.name << " at sample " << i;
    }
  }
}

TEST(Integrate, FixedPointPropertyOnGrid) {
  const SystemSpec sys = builtin(BenchmarkId::cubic1d);
  const auto obs = [](const Vec& x) {
    return Complex(closed_form_u_1d(x[0]), 0.0);
  };
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    Vec x(1);
    x[0] = -1.5 + 3.0 * i / 199.0;
    const Complex v = evaluate_T_delta(sys, obs, x, 1.0, 1001);
    worst = std::max(worst, std::abs(v.real() - closed_form_u_1d(x[0])));
  }
  EXPECT_LE(worst, 5e-3);
}

}  // namespace
}  // namespace zkroa
