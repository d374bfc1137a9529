#include "zeno/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "zeno/error.hpp"
#include "zeno/operators.hpp"
#include "zeno/rng.hpp"

namespace zeno::exp {

std::vector<SpectrumRow> spectrum_scan(const sat::SatInstance& instance, int points, double lo, double hi) {
  if (points < 2) throw RangeError("spectrum scan needs at least two points");
  if (!(hi > lo)) throw RangeError("spectrum range is empty");
  std::vector<SpectrumRow> rows;
  for (int i = 0; i < points; ++i) {
    const double theta = lo + (hi - lo) * i / (points - 1);
    const auto op = ops::cost_operator(instance, ops::uniform_axis(instance.num_vars(), theta));
    rows.push_back({theta, op.eigenvalues, op.gap});
  }
  return rows;
}

FidelityCurve lindblad_curve(const ctl::ControlProblem& p, const Mat& values, const std::string& label) {
  dyn::LindbladOptions opt;
  opt.max_step = p.max_step;
  const auto s = dyn::schedule_from_values(p.instance.num_vars(), p.T_f, values);
  const auto tr = dyn::evolve_lindblad(ctl::initial_state(p), p.instance, s, p.measurement, ctl::target_projector(p), opt);
  return {label, p.T_f, values, tr.times, tr.fidelity, tr.fidelity.back()};
}

Fig3Result run_fig3(const Fig3Config& cfg) {
  const auto inst = sat::generate_instance(sat::InstanceKind::single_solution_ring, cfg.n, 0);
  Fig3Result out;
  out.spectrum = spectrum_scan(inst, cfg.spectrum_points);
  for (double T : cfg.horizons) {
    ctl::ControlProblem p{.kind = ctl::ProblemKind::lindblad_ofs, .instance = inst, .T_f = T, .grid_size = cfg.grid_size};
    out.curves.push_back(lindblad_curve(p, ctl::linear_values(p), "linear"));
    const auto rl = ctl::nesterov_grape(p, cfg.grape);
    out.curves.push_back(lindblad_curve(p, rl.values, "lindblad_ofs"));
    p.kind = ctl::ProblemKind::mlp_ofs;
    const auto rm = ctl::nesterov_grape(p, cfg.grape);
    out.curves.push_back(lindblad_curve(p, rm.values, "mlp_ofs"));
  }
  return out;
}

Fig4Result run_fig4(const Fig4Config& cfg) {
  const auto inst = sat::generate_instance(sat::InstanceKind::single_solution_ring, cfg.n, 0);
  Fig4Result out;
  for (auto kind : {ctl::ProblemKind::lindblad_ofs, ctl::ProblemKind::mlp_ofs}) {
    ctl::ControlProblem p{.kind = kind, .instance = inst, .T_f = cfg.T_f, .grid_size = cfg.grid_size};
    const auto r = ctl::nesterov_grape(p, cfg.grape);
    Fig4Arm arm;
    arm.label = ctl::to_string(kind);
    arm.values = r.values;
    arm.lindblad_fidelity = r.final_fidelity;
    const auto ens = dyn::run_ensemble(ctl::initial_state(p), inst, r.schedule, cfg.measurement,
                                       ctl::target_projector(p), cfg.seed, cfg.shots, cfg.mode, cfg.threads);
    arm.final_fidelities = ens.final_fidelities;
    arm.summary = dyn::ensemble_statistics(arm.final_fidelities, cfg.cutoff, cfg.bins);
    out.arms.push_back(std::move(arm));
  }
  return out;
}

SpeedupRow speedup_point(const sat::SatInstance& instance, const std::string& family, double tau_m,
                         const SpeedupConfig& cfg) {
  SpeedupRow row;
  row.family = family;
  row.n = instance.num_vars();
  row.m = instance.num_clauses();
  row.tau_m = tau_m;
  ctl::ControlProblem p{.kind = ctl::ProblemKind::lindblad_ot, .instance = instance, .T_f = cfg.T_lo,
                        .grid_size = cfg.grid_size, .tau_m = tau_m};
  ctl::TfSearchOptions opt;
  opt.tolerance = cfg.tf_tolerance;

  opt.fixed_linear = true;
  const auto lin = ctl::optimize_tf(p, cfg.T_lo, cfg.T_hi, cfg.grape, opt);
  opt.fixed_linear = false;
  const auto lind = ctl::optimize_tf(p, cfg.T_lo, cfg.T_hi, cfg.grape, opt);
  p.kind = ctl::ProblemKind::mlp_ot;
  const auto mlp = ctl::optimize_tf(p, cfg.T_lo, cfg.T_hi, cfg.grape, opt);

  row.T_linear = lin.T_f;
  row.T_lindblad = lind.T_f;
  row.T_mlp = mlp.T_f;
  row.F_linear = lin.result.final_fidelity;
  row.F_lindblad = lind.result.final_fidelity;
  row.F_mlp = mlp.result.final_fidelity;
  row.tts_linear = lin.result.tts;
  row.tts_lindblad = lind.result.tts;
  row.tts_mlp = mlp.result.tts;
  row.G_lindblad = ctl::relative_speedup(row.tts_lindblad, row.tts_linear);
  row.G_mlp = ctl::relative_speedup(row.tts_mlp, row.tts_linear);
  row.residual_linear = lin.result.tf_residual.value_or(0.0);
  row.residual_lindblad = lind.result.tf_residual.value_or(0.0);
  row.residual_mlp = mlp.result.tf_residual.value_or(0.0);
  row.boundary_linear = lin.at_boundary;
  row.boundary_lindblad = lind.at_boundary;
  row.boundary_mlp = mlp.at_boundary;
  return row;
}

std::vector<SpeedupRow> run_speedup(const std::vector<SpeedupTask>& tasks, const SpeedupConfig& cfg, int threads) {
  std::vector<SpeedupRow> rows(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        const auto& t = tasks[i];
        rows[i] = speedup_point(sat::generate_instance(t.kind, t.n, t.seed), t.family, t.tau_m, cfg);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 0) threads = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  threads = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

std::vector<SpeedupRow> run_fig5(const Fig5Config& cfg) {
  std::vector<SpeedupTask> tasks;
  for (int n : cfg.ring_sizes)
    tasks.push_back({"single_solution_ring", sat::InstanceKind::single_solution_ring, n, cfg.ring_tau_m, cfg.seed});
  for (int n : cfg.random3sat_sizes)
    tasks.push_back({"random3sat", sat::InstanceKind::random3sat, n, cfg.random3sat_tau_m, cfg.seed});
  return run_speedup(tasks, cfg.speedup, cfg.threads);
}

sat::SatInstance fig6_instance(int which) {
  auto clause = [](int a, bool na, int b, bool nb) { return sat::Clause{{a, b}, {na, nb}}; };
  if (which == 1)
    return sat::SatInstance(3, {clause(0, true, 2, false), clause(1, true, 2, false), clause(0, true, 2, false),
                                clause(0, false, 1, true)});
  if (which == 2)
    return sat::SatInstance(3, {clause(0, false, 1, true), clause(1, false, 2, true), clause(0, true, 2, false)});
  throw RangeError("per-qubit study instance must be 1 or 2");
}

Mat perturbed_start(const ctl::ControlProblem& p, double amplitude, std::uint64_t seed) {
  Mat v = ctl::linear_values(p);
  for (Eigen::Index q = 0; q < v.cols(); ++q) {
    Rng rng = substream(seed, 6, static_cast<std::uint64_t>(q));
    double coef[3], phase[3];
    for (int k = 0; k < 3; ++k) {
      coef[k] = standard_normal(rng) / (k + 1);
      phase[k] = 2.0 * std::numbers::pi * uniform01(rng);
    }
    for (Eigen::Index j = 0; j < v.rows(); ++j) {
      const double s = (j + 0.5) / static_cast<double>(v.rows());
      double d = 0.0;
      for (int k = 0; k < 3; ++k) d += coef[k] * std::sin(std::numbers::pi * (k + 1) * s + phase[k]);
      v(j, q) = std::clamp(v(j, q) + amplitude * d, 0.0, 0.5 * std::numbers::pi);
    }
  }
  return v;
}

std::vector<Fig6Run> run_fig6(const Fig6Config& cfg) {
  std::vector<Fig6Run> out;
  for (int which : {1, 2}) {
    Fig6Run run{.label = "instance" + std::to_string(which), .instance = fig6_instance(which)};
    ctl::ControlProblem p{.kind = ctl::ProblemKind::lindblad_ofs, .instance = run.instance, .T_f = cfg.T_f,
                          .grid_size = cfg.grid_size, .per_qubit = true};
    const int n = run.instance.num_vars();
    auto observe = [&](int, const Mat& v, double) {
      run.distance_trace.push_back(ctl::schedule_distance(dyn::schedule_from_values(n, cfg.T_f, v)));
    };
    const auto multi = ctl::nesterov_grape(p, cfg.grape, perturbed_start(p, cfg.perturbation, cfg.seed), observe);
    run.multi_values = multi.values;
    run.multi = lindblad_curve(p, multi.values, "multi_theta");
    p.per_qubit = false;
    const auto single = ctl::nesterov_grape(p, cfg.grape);
    run.single_values = single.values;
    run.single = lindblad_curve(p, single.values, "single_theta");
    run.linear = lindblad_curve(p, ctl::linear_values(p), "linear");
    out.push_back(std::move(run));
  }
  return out;
}

}  // namespace zeno::exp
