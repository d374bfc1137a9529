#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "zeno/analytic_qubit.hpp"
#include "zeno/control.hpp"
#include "zeno/error.hpp"
#include "zeno/operators.hpp"

using namespace zeno;
using namespace zeno::ctl;

namespace {

constexpr double kPi = std::numbers::pi;

ControlProblem small_problem(ProblemKind kind, int n, bool per_qubit, int grid = 16) {
  ControlProblem p{.kind = kind, .instance = sat::generate_instance(sat::InstanceKind::single_solution_ring, n, 0)};
  p.T_f = 2.0;
  p.grid_size = grid;
  p.per_qubit = per_qubit;
  p.fixed_point_tol = 1e-12;
  p.fixed_point_cap = 400;
  return p;
}

Mat wiggle(const ControlProblem& p) {
  Mat v = linear_values(p);
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index k = 0; k < v.cols(); ++k) v(i, k) = std::clamp(v(i, k) + 0.1 * std::sin(3.0 * i + k), 0.0, kPi / 2);
  return v;
}

double max_rel_gradient_error(const ControlProblem& p, const Mat& v) {
  const auto pass = adjoint_pass(p, v);
  const double len = p.T_f / p.grid_size;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
      const double fd = oracle::central_difference(
                            [&](double x) {
                              Mat w = v;
                              w(i, k) = x;
                              return evaluate_cost(p, w);
                            },
                            v(i, k), 1e-5) /
                        len;
      worst = std::max(worst, std::abs(fd - pass.gradient(i, k)) / std::max(1e-8, std::abs(fd)));
    }
  return worst;
}

}  // namespace

TEST_CASE("problem kind names and predicates") {
  for (auto k : {ProblemKind::lindblad_ofs, ProblemKind::lindblad_ot, ProblemKind::mlp_ofs, ProblemKind::mlp_ot})
    CHECK(parse_problem_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_problem_kind("grape"), RangeError);
  CHECK(is_mlp(ProblemKind::mlp_ot));
  CHECK_FALSE(is_mlp(ProblemKind::lindblad_ot));
  CHECK(is_ot(ProblemKind::lindblad_ot));
  CHECK_FALSE(is_ot(ProblemKind::mlp_ofs));
}

TEST_CASE("ControlProblem validation") {
  auto p = small_problem(ProblemKind::lindblad_ot, 2, false);
  CHECK_NOTHROW(validate(p));
  auto q = p;
  q.T_f = 0.0;
  CHECK_THROWS_AS(validate(q), RangeError);
  q = p;
  q.grid_size = 1;
  CHECK_THROWS_AS(validate(q), RangeError);
  q = p;
  q.tau_m = 0.0;
  CHECK_THROWS_AS(validate(q), RangeError);
  q.kind = ProblemKind::lindblad_ofs;
  CHECK_NOTHROW(validate(q));
  GrapeConfig g;
  CHECK_NOTHROW(validate(g));
  g.learning_rate = 0.0;
  CHECK_THROWS_AS(validate(g), RangeError);
  g = GrapeConfig{};
  g.momentum = 1.0;
  CHECK_THROWS_AS(validate(g), RangeError);
  CHECK(track_count(small_problem(ProblemKind::lindblad_ofs, 3, true)) == 3);
  CHECK(track_count(small_problem(ProblemKind::lindblad_ofs, 3, false)) == 1);
}

TEST_CASE("linear initial values are sampled at interval midpoints") {
  const auto p = small_problem(ProblemKind::lindblad_ofs, 2, true, 4);
  const Mat v = linear_values(p);
  REQUIRE(v.rows() == 4);
  REQUIRE(v.cols() == 2);
  for (int j = 0; j < 4; ++j) {
    CHECK(v(j, 0) == doctest::Approx(kPi / 2 * (j + 0.5) / 4));
    CHECK(v(j, 1) == v(j, 0));
  }
  CHECK((initial_state(p) - ops::plus_state(2)).norm() < 1e-15);
  CHECK((target_projector(p) - ops::solution_projector(p.instance)).norm() < 1e-15);
}

TEST_CASE("Lindblad adjoint gradient matches finite differences") {
  for (int n : {2, 3})
    for (bool pq : {false, true}) {
      const auto p = small_problem(ProblemKind::lindblad_ofs, n, pq);
      CHECK(max_rel_gradient_error(p, wiggle(p)) < 1e-4);
    }
  auto ot = small_problem(ProblemKind::lindblad_ot, 2, false);
  CHECK(max_rel_gradient_error(ot, wiggle(ot)) < 1e-4);
}

TEST_CASE("most-likely-path adjoint gradient matches finite differences") {
  for (int n : {2, 3}) {
    const auto p = small_problem(ProblemKind::mlp_ofs, n, n == 2);
    CHECK(max_rel_gradient_error(p, wiggle(p)) < 1e-3);
  }
  auto ot = small_problem(ProblemKind::mlp_ot, 2, false);
  CHECK(max_rel_gradient_error(ot, wiggle(ot)) < 1e-3);
}

TEST_CASE("terminal costate equals the target projector") {
  for (auto kind : {ProblemKind::lindblad_ofs, ProblemKind::mlp_ofs}) {
    const auto p = small_problem(kind, 2, false, 8);
    const auto pass = adjoint_pass(p, linear_values(p));
    REQUIRE(pass.costates.size() == 9);
    REQUIRE(pass.states.size() == 9);
    CHECK((pass.costates.back() - target_projector(p)).cwiseAbs().maxCoeff() == 0.0);
    for (const Mat& L : pass.costates) CHECK((L - L.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("gradient vanishes at a stationary configuration") {
  const double th = 0.7;
  ControlProblem p{.kind = ProblemKind::lindblad_ofs, .instance = qubit::qubit_instance()};
  p.T_f = 1.5;
  p.grid_size = 10;
  p.initial_state = qubit::bloch_state(th);
  p.target = qubit::bloch_state(th);
  const auto pass = adjoint_pass(p, Mat::Constant(10, 1, th));
  CHECK(pass.gradient.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(pass.terminal_fidelity == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cdj_hamiltonian examples") {
  const auto inst = sat::generate_instance(sat::InstanceKind::single_solution_ring, 2, 0);
  const auto axis = ops::uniform_axis(2, kPi / 2);
  const auto P = ops::clause_projectors(inst, axis);
  const Mat zero = Mat::Zero(4, 4);
  for (int b = 0; b < 4; ++b) {
    Mat rho = Mat::Zero(4, 4);
    rho(b, b) = 1.0;
    std::vector<double> r;
    for (const Mat& Pa : P) r.push_back(2.0 * (Pa * rho).trace());
    CHECK(std::abs(cdj_hamiltonian(rho, zero, r, axis, inst)) < 1e-14);
  }
  std::mt19937_64 rng(3);
  const auto axis2 = ops::uniform_axis(2, 0.6);
  const auto P2 = ops::clause_projectors(inst, axis2);
  for (int i = 0; i < 10; ++i) {
    const Mat rho = oracle::random_state(rng, 4, 2);
    std::vector<double> r;
    double expect = 0.0;
    for (const Mat& Pa : P2) {
      const double p = (Pa * rho).trace();
      r.push_back(2.0 * p);
      expect -= 2.0 * (p - p * p);
    }
    expect /= static_cast<double>(P2.size());
    const double h = cdj_hamiltonian(rho, zero, r, axis2, inst);
    CHECK(h <= 0.0);
    CHECK(h == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK_THROWS_AS(cdj_hamiltonian(Mat::Identity(4, 4) / 4, zero, {1.0}, axis2, inst), RangeError);
}

TEST_CASE("optimal_readout examples") {
  const auto inst = sat::generate_instance(sat::InstanceKind::single_solution_ring, 2, 0);
  std::mt19937_64 rng(8);
  const auto P = ops::clause_projectors(inst, ops::uniform_axis(2, 0.9));
  const Mat rho = oracle::random_state(rng, 4, 3);
  CHECK(optimal_readout(rho, Mat::Zero(4, 4), P[0]) == doctest::Approx(2.0 * (P[0] * rho).trace()).epsilon(1e-15));
  const auto Pb = ops::clause_projectors(inst, ops::uniform_axis(2, kPi / 2));
  Mat e = Mat::Zero(4, 4);
  e(1, 1) = 1.0;
  const Mat L = oracle::random_symmetric(rng, 4);
  for (const Mat& Pa : Pb) CHECK(optimal_readout(e, L, Pa) == doctest::Approx(2.0 * (Pa * e).trace()).epsilon(1e-14));
}

TEST_CASE("optimal_readout maximizes the Hamiltonian per channel") {
  const auto inst = sat::generate_instance(sat::InstanceKind::single_solution_ring, 2, 0);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const auto axis = ops::uniform_axis(2, std::uniform_real_distribution<>(0.1, 1.4)(rng));
    const auto P = ops::clause_projectors(inst, axis);
    const Mat rho = oracle::random_state(rng, 4, 2);
    const Mat L = oracle::random_symmetric(rng, 4);
    const double w = 0.5 + trial * 0.5;
    std::vector<double> r(P.size());
    for (std::size_t a = 0; a < P.size(); ++a) r[a] = optimal_readout(rho, L, P[a], w);
    for (std::size_t a = 0; a < P.size(); ++a) {
      auto H = [&](double x) {
        auto rr = r;
        rr[a] = x;
        return cdj_hamiltonian(rho, L, rr, axis, inst, w);
      };
      double best = -1e300, arg = 0.0;
      for (double x = r[a] - 5.0; x <= r[a] + 5.0; x += 1e-4) {
        const double v = H(x);
        if (v > best) {
          best = v;
          arg = x;
        }
      }
      CHECK(std::abs(arg - r[a]) < 2e-4);
      double lo = r[a] - 5.0, hi = r[a] + 5.0;
      auto dH = [&](double x) { return oracle::central_difference(H, x, 1e-3); };
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (dH(mid) > 0.0)
          lo = mid;
        else
          hi = mid;
      }
      CHECK(std::abs(0.5 * (lo + hi) - r[a]) < 1e-10);
    }
  }
}

TEST_CASE("shifted costate frame reproduces the raw costate") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 2;
    const auto inst = sat::generate_instance(sat::InstanceKind::single_solution_ring, n, 0);
    const auto P = ops::clause_projectors(inst, ops::uniform_axis(n, std::uniform_real_distribution<>(0.1, 1.4)(rng)));
    const int d = 1 << n;
    const Mat rho = oracle::random_state(rng, d, 2);
    const Mat L = oracle::random_symmetric(rng, d);
    const double w = 1.0 + 0.1 * trial;
    std::vector<double> r;
    for (std::size_t a = 0; a < P.size(); ++a) r.push_back(std::normal_distribution<>(1.0, 1.0)(rng));
    Mat rho_dot = Mat::Zero(d, d);
    for (std::size_t a = 0; a < P.size(); ++a) {
      const double p = (P[a] * rho).trace();
      rho_dot += (r[a] - 1.0) * (P[a] * rho + rho * P[a] - 2.0 * p * rho);
    }
    rho_dot /= static_cast<double>(P.size());
    const Mat raw = cdj_costate_rhs_raw(rho, L, P, r, w);
    const Mat shifted_L = L + (w - (L * rho).trace()) * Mat::Identity(d, d);
    const Mat expect = raw - ((raw * rho).trace() + (L * rho_dot).trace()) * Mat::Identity(d, d);
    CHECK((cdj_costate_rhs_shifted(rho, shifted_L, P, r) - expect).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("GRAPE improves on the linear ramp") {
  auto p = small_problem(ProblemKind::lindblad_ofs, 2, false, 20);
  GrapeConfig cfg;
  cfg.max_iters = 150;
  int calls = 0;
  int last = -1;
  const auto res = nesterov_grape(p, cfg, std::nullopt, [&](int k, const Mat& v, double) {
    CHECK(k == last + 1);
    last = k;
    ++calls;
    CHECK(v.minCoeff() >= 0.0);
    CHECK(v.maxCoeff() <= kPi / 2);
  });
  CHECK(res.final_fidelity > lindblad_replay_fidelity(p, linear_values(p)));
  CHECK(res.cost_history.size() == static_cast<std::size_t>(res.iterations_used));
  CHECK(calls >= 1);
  for (std::size_t i = 1; i < res.cost_history.size(); ++i) CHECK(res.cost_history[i] <= res.cost_history[i - 1]);
  CHECK(res.values.minCoeff() >= 0.0);
  CHECK(res.values.maxCoeff() <= kPi / 2);
  CHECK(res.final_fidelity == doctest::Approx(res.path_fidelity).epsilon(1e-12));
  CHECK(res.values(0, 0) > 0.01);
  CHECK(res.values(19, 0) < kPi / 2 - 0.01);
  CHECK_FALSE(res.optimal_readouts.has_value());
}

TEST_CASE("GRAPE without clamping may leave the box") {
  auto p = small_problem(ProblemKind::lindblad_ofs, 2, false, 10);
  GrapeConfig cfg;
  cfg.max_iters = 30;
  cfg.clamp = false;
  Mat init = Mat::Constant(10, 1, -0.2);
  const auto res = nesterov_grape(p, cfg, init);
  CHECK(res.values.allFinite());
  CHECK(res.final_cost <= evaluate_cost(p, init));
}

TEST_CASE("control Hamiltonian is constant along an optimized trajectory") {
  auto p = small_problem(ProblemKind::lindblad_ofs, 2, false, 40);
  GrapeConfig cfg;
  cfg.max_iters = 2000;
  cfg.grad_tol = 1e-9;
  const auto res = nesterov_grape(p, cfg);
  const auto pass = adjoint_pass(p, res.values);
  const auto h = lindblad_hamiltonian_trace(p, res.values, pass);
  REQUIRE(h.size() == 41);
  const auto [lo, hi] = std::minmax_element(h.begin() + 1, h.end() - 1);
  double mean = 0.0;
  for (double x : h) mean += x / static_cast<double>(h.size());
  CHECK((*hi - *lo) / std::abs(mean) < 1e-3);
}

TEST_CASE("time_to_solution and relative_speedup") {
  CHECK(time_to_solution(3.0, 5.0, 0.5) == 16.0);
  CHECK(relative_speedup(7.0, 7.0) == 1.0);
  CHECK(relative_speedup(3.0, 6.0) == 0.5);
  CHECK_THROWS_AS(relative_speedup(0.0, 1.0), RangeError);
  CHECK_THROWS_AS(relative_speedup(1.0, -1.0), RangeError);
}

TEST_CASE("tf_stationarity") {
  auto p = small_problem(ProblemKind::lindblad_ot, 2, false, 20);
  OptimizationResult r;
  r.T_f = 40.0;
  p.T_f = 40.0;
  r.values = linear_values(p);
  auto ofs = p;
  ofs.kind = ProblemKind::lindblad_ofs;
  CHECK_THROWS_AS(tf_stationarity(ofs, r), RangeError);

  const double res = tf_stationarity(p, r);
  auto log_tts = [&](double T) {
    auto q = p;
    q.T_f = T;
    return std::log(T + q.tau_m) - std::log(lindblad_replay_fidelity(q, linear_values(q)));
  };
  const double slope = oracle::central_difference(log_tts, 40.0, 1e-3);
  CHECK(slope > 0.0);
  CHECK(res > 0.0);

  auto far = p;
  far.tau_m = 1e12;
  CHECK(tf_stationarity(far, r) == doctest::Approx(res - 1.0 / (40.0 + 5.0)).epsilon(1e-9));
}

TEST_CASE("optimize_tf on a small bracket") {
  auto p = small_problem(ProblemKind::lindblad_ot, 2, false, 10);
  GrapeConfig cfg;
  cfg.max_iters = 20;
  TfSearchOptions opt;
  opt.tolerance = 0.1;
  opt.fixed_linear = true;
  const auto lin = optimize_tf(p, 1.0, 10.0, cfg, opt);
  CHECK(lin.T_f >= 1.0);
  CHECK(lin.T_f <= 10.0);
  CHECK(lin.result.tf_residual.has_value());
  CHECK(lin.probes.size() >= 2);
  CHECK(lin.result.tts == doctest::Approx((lin.T_f + 5.0) / lin.result.final_fidelity));
  opt.fixed_linear = false;
  const auto opt_run = optimize_tf(p, 1.0, 10.0, cfg, opt);
  CHECK(opt_run.result.tts <= lin.result.tts * (1.0 + 1e-9));
  CHECK_THROWS_AS(optimize_tf(p, 2.0, 1.0, cfg, opt), RangeError);
  auto ofs = p;
  ofs.kind = ProblemKind::lindblad_ofs;
  CHECK_THROWS_AS(optimize_tf(ofs, 1.0, 2.0, cfg, opt), RangeError);
  auto mlp = p;
  mlp.kind = ProblemKind::mlp_ot;
  opt.fixed_linear = true;
  CHECK_THROWS_AS(optimize_tf(mlp, 1.0, 2.0, cfg, opt), RangeError);
}

TEST_CASE("schedule_distance") {
  const std::vector<double> times{0.0, 1.0, 2.0, 3.0};
  CHECK(schedule_distance({{0.2, 0.4, 0.1, 0.3}, {0.2, 0.4, 0.1, 0.3}}, times) == 0.0);
  const double c = 0.3;
  CHECK(schedule_distance({{0.5, 0.5, 0.5, 0.5}, {0.5 + c, 0.5 + c, 0.5 + c, 0.5 + c}}, times) ==
        doctest::Approx(c * std::sqrt(3.0)).epsilon(1e-14));
  CHECK_THROWS_AS(schedule_distance({{0.1, 0.2, 0.3, 0.4}}, times), RangeError);
  CHECK_THROWS_AS(schedule_distance({{0.1, 0.2}, {0.1, 0.2, 0.3}}, times), RangeError);
  Mat v(4, 2);
  v << 0.1, 0.4, 0.1, 0.4, 0.1, 0.4, 0.1, 0.4;
  CHECK(schedule_distance(dyn::schedule_from_values(2, 2.0, v)) == doctest::Approx(0.3 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(schedule_distance(dyn::schedule_from_values(1, 2.0, Mat::Constant(4, 1, 0.2))), RangeError);
}
