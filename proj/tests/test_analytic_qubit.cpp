#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "zeno/analytic_qubit.hpp"
#include "zeno/error.hpp"
#include "zeno/operators.hpp"

using namespace zeno;
using namespace zeno::qubit;

namespace {

constexpr double kPi = std::numbers::pi;

QubitDragSpec make(double phi_i, double phi_f, double gamma, double T) {
  return QubitDragSpec{.phi_i = phi_i, .phi_f = phi_f, .gamma_rate = gamma, .T_f = T};
}

}  // namespace

TEST_CASE("mlp_schedule examples") {
  const auto same = make(0.4, 0.4, 0.25, 3.0);
  for (double t : {0.0, 1.0, 3.0}) CHECK(mlp_schedule(same, t) == 0.4);
  const auto s = make(0.0, kPi / 2, 1.0, 1.0);
  CHECK(mlp_schedule(s, 0.0) == doctest::Approx(std::atan(kPi / 8)).epsilon(1e-15));
  CHECK(mlp_schedule(s, 0.5) == doctest::Approx(kPi / 4 + std::atan(kPi / 8)).epsilon(1e-15));
  const auto slow = make(0.0, kPi / 2, 1e6, 1.0);
  CHECK(std::abs(mlp_schedule(slow, 0.0)) < 1e-6);
  CHECK(mlp_schedule(slow, 1.0) == doctest::Approx(kPi / 2).epsilon(1e-6));
}

TEST_CASE("solve_phi_tf examples") {
  CHECK(solve_phi_tf(make(0.3, 0.3, 0.25, 1.0)) == 0.3);
  const auto s = make(0.0, kPi / 2, 1.0, 2.0);
  const double p = solve_phi_tf(s);
  CHECK(p > 0.0);
  CHECK(p < kPi / 2);
  CHECK(std::abs(std::sin(kPi / 2 - p) - p / 2.0) < 1e-12);
  CHECK(solve_phi_tf(make(0.0, kPi / 2, 1e6, 1.0)) == doctest::Approx(kPi / 2).epsilon(1e-5));
  const auto down = make(1.2, 0.1, 0.5, 3.0);
  const double q = solve_phi_tf(down);
  CHECK(q < 1.2);
  CHECK(q > 0.1);
  CHECK(std::abs(phi_tf_residual(down, q)) < 1e-12);
}

TEST_CASE("solve_phi_tf residual stays below 1e-12 on a grid") {
  for (int a = 1; a <= 10; ++a)
    for (int b = 1; b <= 10; ++b) {
      const auto s = make(0.0, 0.3 * b, 0.25, 0.8 * a);
      CHECK(std::abs(phi_tf_residual(s, solve_phi_tf(s))) < 1e-12);
    }
}

TEST_CASE("analytic qubit errors") {
  CHECK_THROWS_AS(solve_phi_tf(make(0.0, 3.5, 0.25, 1.0)), RangeError);
  CHECK_THROWS_AS(mlp_schedule(make(0.0, 1.0, 0.25, 1.0), 1.5), RangeError);
  CHECK_THROWS_AS(mlp_schedule(make(0.0, 1.0, 0.25, 1.0), -0.1), RangeError);
  CHECK_THROWS_AS(lindblad_schedule(make(0.0, 1.0, 0.0, 1.0), 0.5), RangeError);
  CHECK_THROWS_AS(optimal_cost(make(0.0, 1.0, 0.25, 0.0)), RangeError);
  CHECK_THROWS_AS(mlp_endpoint(make(0.0, 1.0, 0.25, 1.0), 0.0), RangeError);
}

TEST_CASE("lindblad_schedule is affine") {
  const auto s = make(0.1, 1.4, 0.3, 2.5);
  const double p = solve_phi_tf(s);
  CHECK(lindblad_schedule(s, 0.0) == doctest::Approx(0.1 + 0.5 * (1.4 - p)));
  CHECK(lindblad_schedule(s, 2.5) == doctest::Approx(p + 0.5 * (1.4 - p)));
  const double h = 0.5;
  for (double t : {0.5, 1.0, 1.5, 2.0}) {
    const double second = lindblad_schedule(s, t + h) - 2.0 * lindblad_schedule(s, t) + lindblad_schedule(s, t - h);
    CHECK(std::abs(second) < 1e-14);
  }
  for (double t : {0.0, 1.0}) CHECK(lindblad_schedule(make(0.7, 0.7, 0.3, 1.0), t) == 0.7);
}

TEST_CASE("optimal_cost examples") {
  CHECK(optimal_cost(make(0.5, 0.5, 0.25, 4.0)) == 1.0);
  double prev = 0.0;
  for (int i = 1; i <= 50; ++i) {
    const double J = optimal_cost(make(0.0, kPi / 2, 0.25, 0.2 * i));
    CHECK(J > prev);
    prev = J;
  }
}

TEST_CASE("replaying the Lindblad schedule reproduces the optimal cost") {
  for (double T : {1.0, 4.0}) {
    const auto s = make(0.0, kPi / 2, 0.25, T);
    const double J = replay_cost(s, [&](double t) { return lindblad_schedule(s, t); }, 400);
    CHECK(std::abs(J - optimal_cost(s)) < 1e-6);
  }
}

TEST_CASE("Lindblad schedule beats the linear ramp on a grid") {
  for (int a = 1; a <= 10; ++a)
    for (int b = 1; b <= 10; ++b) {
      const auto s = make(0.0, 0.15 * b, 0.25, 0.6 * a);
      const double opt = replay_cost(s, [&](double t) { return lindblad_schedule(s, t); }, 100);
      const double lin = replay_cost(s, [&](double t) { return s.phi_i + (s.phi_f - s.phi_i) * t / s.T_f; }, 100);
      CHECK(opt - lin >= -1e-9);
    }
}

TEST_CASE("constant offsets do not improve the Lindblad schedule") {
  for (double T : {0.5, 2.0, 6.0}) {
    const auto s = make(0.0, kPi / 2, 0.25, T);
    const double J = optimal_cost(s);
    for (double off : {-0.02, 0.02}) {
      const double c = replay_cost(s, [&](double t) { return lindblad_schedule(s, t) + off; }, 400);
      CHECK(c <= J + 1e-6);
    }
  }
}

TEST_CASE("mlp_endpoint solves its balance equation") {
  const auto s = make(0.0, kPi / 2, 0.25, 1.0);
  const double e = mlp_endpoint(s);
  const double x = e - s.phi_i;
  CHECK(std::abs(x / (4.0 * 0.25 * 1.0) - 0.5 * std::sin(kPi / 2 - x)) < 1e-12);
  CHECK(e > 0.0);
  CHECK(e < kPi / 2);
  CHECK(mlp_endpoint(s, 0.5) > e);
  CHECK(mlp_endpoint(s, 1.0, 2.0) > e);
  CHECK(mlp_endpoint(make(0.3, 0.3, 0.25, 1.0)) == 0.3);
  CHECK(mlp_schedule_to(s, kPi / 2, 0.3) == doctest::Approx(mlp_schedule(s, 0.3)).epsilon(1e-15));
  CHECK(mlp_schedule_to(s, e, 1.0) == doctest::Approx(e + std::atan(e / (4.0 * 0.25))).epsilon(1e-15));
}

TEST_CASE("qubit helpers") {
  const auto inst = qubit_instance();
  CHECK(inst.num_vars() == 1);
  for (double th : {0.0, 0.4, 1.3}) {
    const Mat P = ops::clause_projectors(inst, ops::uniform_axis(1, th)).front();
    CHECK((P - 0.5 * (Mat::Identity(2, 2) - sigma(th))).norm() < 1e-12);
    const Mat rho = bloch_state(th);
    CHECK(rho.trace() == doctest::Approx(1.0));
    CHECK((rho * rho - rho).norm() < 1e-12);
    CHECK((sigma(th) * sigma(th) - Mat::Identity(2, 2)).norm() < 1e-12);
  }
  const auto cfg = measurement_config(make(0.0, 1.0, 0.5, 1.0));
  CHECK(cfg.tau == 0.5);
}
