#include "zeno/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include "zeno/analytic_qubit.hpp"
#include "zeno/bounds.hpp"
#include "zeno/control.hpp"
#include "zeno/dynamics.hpp"
#include "zeno/error.hpp"
#include "zeno/experiments.hpp"
#include "zeno/operators.hpp"
#include "zeno/sat.hpp"

namespace zeno::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot write '" + path.string() + "'");
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  void values(const std::vector<double>& cells) {
    std::vector<std::string> s;
    for (double c : cells) s.push_back(num(c));
    row(s);
  }
  void close() {
    out_.close();
    if (!out_) throw IoError("failed writing '" + path_.string() + "'");
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

/// Run state shared by every subcommand.
struct Run {
  CLI::App* sub = nullptr;
  fs::path out_dir;
  std::vector<std::string> outputs;
  json summary = json::object();

  fs::path file(const std::string& name) {
    outputs.push_back(name);
    return out_dir / name;
  }
};

template <class T>
json echo_value(const T& v) {
  return json(v);
}

template <class T>
json echo_value(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string key_of(const CLI::Option* opt) {
  std::string k = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames().front();
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

/// Options per subcommand with typed access to their resolved values.
class Registry {
 public:
  template <class T>
  CLI::Option* opt(CLI::App* app, const std::string& name, T& var, const std::string& desc) {
    CLI::Option* o = app->add_option(name, var, desc);
    echo_[app].emplace_back(key_of(o), [&var] { return echo_value(var); });
    return o;
  }
  CLI::Option* flag(CLI::App* app, const std::string& name, bool& var, const std::string& desc) {
    CLI::Option* o = app->add_flag(name, var, desc);
    echo_[app].emplace_back(key_of(o), [&var] { return json(var); });
    return o;
  }
  json echo(const CLI::App* app) const {
    json j = json::object();
    j["subcommand"] = app->get_name();
    if (auto it = echo_.find(app); it != echo_.end())
      for (const auto& [k, f] : it->second) j[k] = f();
    return j;
  }

 private:
  std::map<const CLI::App*, std::vector<std::pair<std::string, std::function<json()>>>> echo_;
};

struct InstanceOpts {
  std::string file;
  std::string kind = "single_solution_ring";
  int n = 2;
  std::uint64_t seed = 0;
};

void add_instance_opts(Registry& reg, CLI::App* app, InstanceOpts& o) {
  reg.opt(app, "--instance", o.file, "DIMACS CNF file (overrides --kind/--n)");
  reg.opt(app, "--kind", o.kind, "generator: ring2sat | single_solution_ring | random3sat");
  reg.opt(app, "--n", o.n, "number of variables for the generator");
  reg.opt(app, "--seed", o.seed, "seed");
}

sat::SatInstance load_instance(const InstanceOpts& o) {
  if (!o.file.empty()) return sat::parse_dimacs(std::string_view(read_file(o.file)));
  return sat::generate_instance(sat::parse_instance_kind(o.kind), o.n, o.seed);
}

struct MeasOpts {
  double dt = 0.01;
  double tau = 1.0;
  std::string share = "per_clause";
};

void add_meas_opts(Registry& reg, CLI::App* app, MeasOpts& o) {
  reg.opt(app, "--dt", o.dt, "measurement duration per step (tau)");
  reg.opt(app, "--tau", o.tau, "characteristic measurement time");
  reg.opt(app, "--rate-share", o.share, "per_clause | parallel");
}

dyn::MeasurementConfig measurement(const MeasOpts& o) {
  dyn::MeasurementConfig c;
  c.dt = o.dt;
  c.tau = o.tau;
  if (o.share == "per_clause")
    c.rate_share = dyn::RateShare::per_clause;
  else if (o.share == "parallel")
    c.rate_share = dyn::RateShare::parallel;
  else
    throw RangeError("rate share must be per_clause or parallel");
  dyn::validate(c);
  return c;
}

dyn::TrajectoryMode trajectory_mode(const std::string& s) {
  if (s == "sme") return dyn::TrajectoryMode::sme;
  if (s == "kraus") return dyn::TrajectoryMode::kraus;
  throw RangeError("mode must be kraus, sme or lindblad");
}

/// Schedule CSV: a header row, then (t, theta) or (t, theta_1..theta_n) per grid point.
dyn::Schedule read_schedule(const fs::path& path, int n) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ParseError("schedule file '" + path.string() + "' is empty");
  dyn::Schedule s;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      double v = 0.0;
      const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (r.ec != std::errc() || r.ptr != cell.data() + cell.size())
        throw ParseError("schedule line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      cells.push_back(v);
    }
    if (cells.size() == 2)
      s.axes.push_back(ops::uniform_axis(n, cells[1]));
    else if (cells.size() == static_cast<std::size_t>(n) + 1)
      s.axes.emplace_back(cells.begin() + 1, cells.end());
    else
      throw ParseError("schedule line " + std::to_string(lineno) + ": expected 2 or " + std::to_string(n + 1) +
                       " columns");
    s.times.push_back(cells[0]);
  }
  if (s.times.size() < 2) throw ParseError("schedule needs at least two grid points");
  s.validate(n);
  return s;
}

void write_schedule(const fs::path& path, const dyn::Schedule& s, bool per_qubit, Csv* existing = nullptr) {
  const std::size_t n = s.axes.front().size();
  std::vector<std::string> header{"t_tau"};
  if (per_qubit)
    for (std::size_t q = 0; q < n; ++q) header.push_back("theta_" + std::to_string(q + 1) + "_rad");
  else
    header.push_back("theta_rad");
  Csv csv(path, header);
  for (std::size_t j = 0; j < s.times.size(); ++j) {
    std::vector<double> row{s.times[j]};
    if (per_qubit)
      row.insert(row.end(), s.axes[j].begin(), s.axes[j].end());
    else
      row.push_back(s.axes[j][0]);
    csv.values(row);
  }
  csv.close();
  (void)existing;
}

json summary_json(const dyn::EnsembleSummary& s) {
  json j;
  j["count"] = s.count;
  j["mean"] = s.mean;
  j["variance"] = s.variance;
  j["std_error"] = s.std_error;
  j["cutoff"] = s.cutoff ? json(*s.cutoff) : json(nullptr);
  j["retained"] = s.retained;
  j["retained_fraction"] = s.retained_fraction;
  j["post_selected_mean"] = s.post_selected_mean ? json(*s.post_selected_mean) : json(nullptr);
  j["post_selected_std_error"] = s.post_selected_std_error ? json(*s.post_selected_std_error) : json(nullptr);
  return j;
}

void write_histogram(Run& run, const std::string& name, const dyn::EnsembleSummary& s) {
  Csv csv(run.file(name), {"bin_lo_fidelity", "bin_hi_fidelity", "count"});
  for (std::size_t b = 0; b < s.histogram.size(); ++b)
    csv.row({num(s.bin_edges[b]), num(s.bin_edges[b + 1]), std::to_string(s.histogram[b])});
  csv.close();
}

void write_finals(Run& run, const std::string& name, const std::vector<double>& f) {
  Csv csv(run.file(name), {"shot", "final_fidelity"});
  for (std::size_t s = 0; s < f.size(); ++s) csv.row({std::to_string(s), num(f[s])});
  csv.close();
}

// ---------------------------------------------------------------- gen

struct GenOpts {
  InstanceOpts inst;
  std::string output;
};

void cmd_gen(Run& run, const GenOpts& o) {
  const auto inst = sat::generate_instance(sat::parse_instance_kind(o.inst.kind), o.inst.n, o.inst.seed);
  const fs::path path = o.output;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << sat::render_dimacs(inst);
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
  run.outputs.push_back(path.filename().string());
  run.summary["n"] = inst.num_vars();
  run.summary["m"] = inst.num_clauses();
  run.summary["solutions"] = sat::enumerate_solutions(inst).size();
}

// ---------------------------------------------------------------- spectrum

struct SpectrumOpts {
  InstanceOpts inst;
  int points = 91;
  double theta_lo = 0.0;
  double theta_hi = kHalfPi;
};

void write_spectrum(Csv& csv, const std::vector<exp::SpectrumRow>& rows) {
  for (const auto& r : rows) {
    std::vector<double> v{r.theta};
    v.insert(v.end(), r.eigenvalues.begin(), r.eigenvalues.end());
    v.push_back(r.gap);
    csv.values(v);
  }
}

std::vector<std::string> spectrum_header(int n) {
  std::vector<std::string> h{"theta_rad"};
  for (int i = 0; i < (1 << n); ++i) h.push_back("lambda_" + std::to_string(i));
  h.push_back("gap");
  return h;
}

void cmd_spectrum(Run& run, const SpectrumOpts& o) {
  const auto inst = load_instance(o.inst);
  const auto rows = exp::spectrum_scan(inst, o.points, o.theta_lo, o.theta_hi);
  Csv csv(run.file("spectrum.csv"), spectrum_header(inst.num_vars()));
  write_spectrum(csv, rows);
  csv.close();
  double gmin = rows.front().gap;
  for (const auto& r : rows) gmin = std::min(gmin, r.gap);
  run.summary["min_gap"] = gmin;
  run.summary["final_gap"] = rows.back().gap;
}

// ---------------------------------------------------------------- drag / ensemble

struct DragOpts {
  InstanceOpts inst;
  MeasOpts meas;
  std::string schedule = "linear";
  std::string mode = "kraus";
  double T_f = 5.0;
  int grid = 100;
  double theta_i = 0.0;
  double theta_f = kHalfPi;
  int shots = 100;
  std::optional<double> cutoff;
  int trace_shots = 1;
  int bins = 20;
  int threads = 0;
};

void add_drag_opts(Registry& reg, CLI::App* app, DragOpts& o) {
  add_instance_opts(reg, app, o.inst);
  add_meas_opts(reg, app, o.meas);
  reg.opt(app, "--schedule", o.schedule, "linear or a schedule CSV (t_tau, theta_rad...)");
  reg.opt(app, "--T-f", o.T_f, "horizon for the linear schedule (tau)");
  reg.opt(app, "--grid", o.grid, "intervals of the linear schedule");
  reg.opt(app, "--theta-i", o.theta_i, "linear schedule start (rad)");
  reg.opt(app, "--theta-f", o.theta_f, "linear schedule end (rad)");
  reg.opt(app, "--shots", o.shots, "trajectories");
  reg.opt(app, "--cutoff", o.cutoff, "post-selection fidelity cutoff");
  reg.opt(app, "--bins", o.bins, "histogram bins on [0, 1]");
  reg.opt(app, "--threads", o.threads, "worker threads (0 = hardware)");
}

dyn::Schedule drag_schedule(const DragOpts& o, int n) {
  if (o.schedule == "linear") return dyn::linear_schedule(n, o.T_f, o.grid, o.theta_i, o.theta_f);
  return read_schedule(o.schedule, n);
}

void cmd_drag(Run& run, const DragOpts& o) {
  const auto inst = load_instance(o.inst);
  const int n = inst.num_vars();
  const auto cfg = measurement(o.meas);
  const auto sched = drag_schedule(o, n);
  const Mat rho0 = ops::plus_state(n);
  const Mat target = ops::solution_projector(inst);
  if (o.mode == "lindblad") {
    dyn::LindbladOptions lo;
    lo.store_states = true;
    const auto tr = dyn::evolve_lindblad(rho0, inst, sched, cfg, target, lo);
    Csv csv(run.file("trace.csv"), {"t_tau", "fidelity", "purity"});
    for (std::size_t j = 0; j < tr.times.size(); ++j)
      csv.values({tr.times[j], tr.fidelity[j], dyn::purity(tr.states[j])});
    csv.close();
    run.summary["final_fidelity"] = tr.fidelity.back();
    run.summary["final_purity"] = dyn::purity(tr.final_state);
    return;
  }
  const auto mode = trajectory_mode(o.mode);
  if (o.trace_shots > 0) {
    Csv csv(run.file("trace.csv"), {"shot", "t_tau", "fidelity", "purity"});
    dyn::TrajectoryOptions to;
    to.mode = mode;
    for (int s = 0; s < std::min(o.trace_shots, o.shots); ++s) {
      Rng rng = substream(o.inst.seed, 1, static_cast<std::uint64_t>(s));
      const auto rec = dyn::evolve_trajectory(rho0, inst, sched, cfg, rng, target, to);
      for (std::size_t k = 0; k < rec.times.size(); ++k)
        csv.row({std::to_string(s), num(rec.times[k]), num(rec.fidelity_trace[k]), num(rec.purity_trace[k])});
    }
    csv.close();
  }
  const auto ens = dyn::run_ensemble(rho0, inst, sched, cfg, target, o.inst.seed, o.shots, mode, o.threads);
  write_finals(run, "finals.csv", ens.final_fidelities);
  const auto st = dyn::ensemble_statistics(ens.final_fidelities, o.cutoff, o.bins);
  write_histogram(run, "histogram.csv", st);
  run.summary["ensemble"] = summary_json(st);
  run.summary["final_fidelity"] = st.mean;
}

// ---------------------------------------------------------------- plan

struct PlanOpts {
  InstanceOpts inst;
  MeasOpts meas;
  double eps1 = 0.05;
  double eps2 = 0.05;
  double theta_i = 0.1;
  double theta_f = kHalfPi;
  double first_step = 0.0;
  double gap_floor = bounds::kGapFloor;
  bool execute = false;
  int kraus_shots = 0;
};

void cmd_plan(Run& run, const PlanOpts& o) {
  const auto inst = load_instance(o.inst);
  const auto cfg = measurement(o.meas);
  const int n = inst.num_vars();
  bounds::PlanOptions po;
  po.first_step = o.first_step;
  po.gap_floor = o.gap_floor;
  const auto plan = bounds::plan_linear_drag(
      n, o.theta_i, o.theta_f, o.eps1, o.eps2, cfg,
      [&](double th) { return ops::spectral_gap(inst, ops::uniform_axis(n, th)); }, po);
  const auto ct = bounds::corollary_time(plan, cfg);
  json j;
  j["n"] = plan.n;
  j["theta_i"] = plan.theta_i;
  j["theta_f"] = plan.theta_f;
  j["delta_theta"] = plan.delta_theta;
  j["N"] = plan.N;
  j["epsilon1"] = plan.epsilon1;
  j["epsilon2"] = plan.epsilon2;
  j["log_numerator"] = plan.log_numerator;
  j["dt"] = plan.dt;
  j["tau"] = plan.tau;
  j["beta"] = plan.beta;
  j["gap_min"] = plan.gap_min;
  j["first_step"] = plan.first_step;
  j["total_applications"] = plan.total_applications;
  j["total_time"] = plan.total_time;
  j["upsilon"] = plan.upsilon;
  j["corollary_total_time"] = ct.total_time;
  j["corollary_uniform_time"] = ct.uniform_time;
  j["M_uniform"] = ct.M_uniform;
  if (o.execute) {
    const auto ex = bounds::execute_plan(inst, plan, cfg);
    j["executed_fidelity"] = ex.final_fidelity;
    run.summary["final_fidelity"] = ex.final_fidelity;
  }
  if (o.kraus_shots > 0) {
    const auto f = bounds::execute_plan_kraus(inst, plan, cfg, o.inst.seed, o.kraus_shots);
    const auto st = dyn::ensemble_statistics(f, std::nullopt);
    j["kraus_mean_fidelity"] = st.mean;
    j["kraus_std_error"] = st.std_error;
    write_finals(run, "plan_kraus_finals.csv", f);
  }
  write_json(run.file("plan.json"), j);
  Csv csv(run.file("plan_steps.csv"), {"k", "theta_k_rad", "gap", "M_k"});
  for (std::size_t k = 0; k < plan.thetas.size(); ++k)
    csv.row({std::to_string(k + 1), num(plan.thetas[k]), num(plan.gaps[k]), std::to_string(plan.M_per_step[k])});
  csv.close();
  run.summary["N"] = plan.N;
  run.summary["total_time"] = plan.total_time;
  run.summary["corollary_total_time"] = ct.total_time;
}

// ---------------------------------------------------------------- optimize

struct GrapeOpts {
  double eta = 0.05;
  double momentum = 0.9;
  int max_iters = 2000;
  double grad_tol = 1e-6;
  double theta_lo = 0.0;
  double theta_hi = kHalfPi;
  bool no_clamp = false;
  double weight = 1.0;
};

void add_grape_opts(Registry& reg, CLI::App* app, GrapeOpts& o) {
  reg.opt(app, "--eta", o.eta, "learning rate");
  reg.opt(app, "--momentum", o.momentum, "Nesterov momentum in [0, 1)");
  reg.opt(app, "--max-iters", o.max_iters, "iteration cap");
  reg.opt(app, "--grad-tol", o.grad_tol, "projected gradient norm tolerance");
  reg.opt(app, "--theta-lo", o.theta_lo, "lower clamp (rad)");
  reg.opt(app, "--theta-hi", o.theta_hi, "upper clamp (rad)");
  reg.flag(app, "--no-clamp", o.no_clamp, "disable angle clamping");
  reg.opt(app, "--weight", o.weight, "running cost weight of the most-likely-path problems");
}

ctl::GrapeConfig grape_config(const GrapeOpts& o) {
  ctl::GrapeConfig c;
  c.learning_rate = o.eta;
  c.momentum = o.momentum;
  c.max_iters = o.max_iters;
  c.grad_tol = o.grad_tol;
  c.theta_lo = o.theta_lo;
  c.theta_hi = o.theta_hi;
  c.clamp = !o.no_clamp;
  c.cdj_running_cost_weight = o.weight;
  ctl::validate(c);
  return c;
}

struct OptimizeOpts {
  InstanceOpts inst;
  MeasOpts meas;
  GrapeOpts grape;
  std::string problem = "lindblad_ofs";
  double T_f = 2.0;
  std::vector<double> bracket;
  int grid = 100;
  double tau_m = 5.0;
  bool per_qubit = false;
  double tf_tol = 1e-2;
  double perturb = 0.0;
};

json result_json(const ctl::OptimizationResult& r) {
  json j;
  j["T_f"] = r.T_f;
  j["final_fidelity"] = r.final_fidelity;
  j["path_fidelity"] = r.path_fidelity;
  j["final_cost"] = r.final_cost;
  j["tts"] = r.tts;
  j["converged"] = r.converged;
  j["iterations_used"] = r.iterations_used;
  j["evaluations"] = r.evaluations;
  j["restarts"] = r.restarts;
  j["tf_residual"] = r.tf_residual ? json(*r.tf_residual) : json(nullptr);
  j["cost_history"] = r.cost_history;
  j["gradient_norm_history"] = r.gradient_norm_history;
  return j;
}

void cmd_optimize(Run& run, const OptimizeOpts& o) {
  const auto inst = load_instance(o.inst);
  ctl::ControlProblem p{.kind = ctl::parse_problem_kind(o.problem), .instance = inst, .T_f = o.T_f,
                        .grid_size = o.grid, .tau_m = o.tau_m, .per_qubit = o.per_qubit,
                        .measurement = measurement(o.meas)};
  const auto cfg = grape_config(o.grape);
  std::optional<Mat> start;
  if (o.perturb > 0.0) start = exp::perturbed_start(p, o.perturb, o.inst.seed);
  ctl::OptimizationResult r;
  json j;
  if (!o.bracket.empty()) {
    if (o.bracket.size() != 2) throw RangeError("--bracket takes two values");
    if (!ctl::is_ot(p.kind)) throw RangeError("--bracket needs an optimal-time problem");
    ctl::TfSearchOptions so;
    so.tolerance = o.tf_tol;
    auto s = ctl::optimize_tf(p, o.bracket[0], o.bracket[1], cfg, so);
    r = std::move(s.result);
    j = result_json(r);
    j["at_boundary"] = s.at_boundary;
    json probes = json::array();
    for (const auto& pr : s.probes) probes.push_back({{"T_f", pr.T_f}, {"objective", pr.objective}, {"fidelity", pr.fidelity}});
    j["probes"] = probes;
    if (s.at_boundary) std::cerr << "warning: optimal T_f lies on the bracket boundary\n";
  } else {
    r = ctl::nesterov_grape(p, cfg, start);
    j = result_json(r);
    if (ctl::is_ot(p.kind)) {
      r.tf_residual = ctl::tf_stationarity(p, r);
      j["tf_residual"] = *r.tf_residual;
    }
  }
  write_schedule(run.file("schedule.csv"), r.schedule, o.per_qubit);
  write_json(run.file("result.json"), j);
  if (r.optimal_readouts) {
    std::vector<std::string> h{"t_tau"};
    for (std::size_t a = 0; a < inst.num_clauses(); ++a) h.push_back("r_" + std::to_string(a + 1) + "_inv_sqrt_tau");
    Csv csv(run.file("readouts.csv"), h);
    const Mat& R = *r.optimal_readouts;
    for (Eigen::Index k = 0; k < R.cols(); ++k) {
      std::vector<double> row{r.schedule.times[k]};
      for (Eigen::Index a = 0; a < R.rows(); ++a) row.push_back(R(a, k));
      csv.values(row);
    }
    csv.close();
  }
  run.summary["final_fidelity"] = r.final_fidelity;
  run.summary["tts"] = r.tts;
  run.summary["T_f"] = r.T_f;
  run.summary["final_cost"] = r.final_cost;
  if (o.per_qubit && inst.num_vars() > 1) run.summary["d_l2"] = ctl::schedule_distance(r.schedule);
}

// ---------------------------------------------------------------- ensemble

void cmd_ensemble(Run& run, DragOpts o) {
  const auto inst = load_instance(o.inst);
  const int n = inst.num_vars();
  const auto cfg = measurement(o.meas);
  const auto sched = drag_schedule(o, n);
  const auto ens = dyn::run_ensemble(ops::plus_state(n), inst, sched, cfg, ops::solution_projector(inst), o.inst.seed,
                                     o.shots, trajectory_mode(o.mode), o.threads);
  write_finals(run, "finals.csv", ens.final_fidelities);
  const auto st = dyn::ensemble_statistics(ens.final_fidelities, o.cutoff, o.bins);
  write_histogram(run, "histogram.csv", st);
  Csv csv(run.file("mean_state.csv"), {"row", "col", "mean", "std_error"});
  for (Eigen::Index i = 0; i < ens.mean_state.rows(); ++i)
    for (Eigen::Index k = 0; k < ens.mean_state.cols(); ++k)
      csv.row({std::to_string(i), std::to_string(k), num(ens.mean_state(i, k)), num(ens.state_std_error(i, k))});
  csv.close();
  write_json(run.file("summary.json"), summary_json(st));
  run.summary["ensemble"] = summary_json(st);
  run.summary["final_fidelity"] = st.mean;
}

// ---------------------------------------------------------------- qubit-analytic

struct QubitOpts {
  double phi_i = 0.0;
  double phi_f = kHalfPi;
  double gamma = 0.25;
  double T_f = 1.0;
  int points = 101;
  double weight = 1.0;
};

void cmd_qubit(Run& run, const QubitOpts& o) {
  qubit::QubitDragSpec spec{o.phi_i, o.phi_f, o.gamma, o.T_f};
  qubit::validate(spec);
  if (o.points < 2) throw RangeError("--points must be >= 2");
  const double phi_end = spec.phi_i + qubit::mlp_endpoint(spec, o.weight);
  Csv csv(run.file("qubit.csv"), {"t_tau", "theta_mlp_rad", "theta_lindblad_rad", "theta_mlp_endpoint_rad"});
  for (int k = 0; k < o.points; ++k) {
    const double t = spec.T_f * k / (o.points - 1);
    csv.values({t, qubit::mlp_schedule(spec, t), qubit::lindblad_schedule(spec, t),
                qubit::mlp_schedule_to(spec, phi_end, t)});
  }
  csv.close();
  json j;
  j["phi_Tf"] = qubit::solve_phi_tf(spec);
  j["J_star"] = qubit::optimal_cost(spec);
  j["phi_Tf_residual"] = qubit::phi_tf_residual(spec, j["phi_Tf"].get<double>());
  j["mlp_phi_Tf"] = phi_end;
  write_json(run.file("qubit.json"), j);
  run.summary["phi_Tf"] = j["phi_Tf"];
  run.summary["J_star"] = j["J_star"];
}

// ---------------------------------------------------------------- speedup

struct SpeedupOpts {
  std::string family = "single_solution_ring";
  std::string n = "2..5";
  std::optional<double> tau_m;
  std::uint64_t seed = 0;
  std::vector<double> bracket{1.0, 40.0};
  int grid = 50;
  double tf_tol = 0.05;
  GrapeOpts grape{.max_iters = 200};
  int threads = 0;
};

std::vector<int> parse_range(const std::string& s) {
  std::vector<int> out;
  auto to_int = [&](std::string_view t) {
    int v = 0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size()) throw RangeError("bad size list '" + s + "'");
    return v;
  };
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_int(part));
    } else {
      const int a = to_int(std::string_view(part).substr(0, dots));
      const int b = to_int(std::string_view(part).substr(dots + 2));
      if (b < a) throw RangeError("empty size range '" + part + "'");
      for (int v = a; v <= b; ++v) out.push_back(v);
    }
  }
  if (out.empty()) throw RangeError("empty size list");
  return out;
}

const std::vector<std::string> kSpeedupHeader{
    "family",         "n",           "m",           "tau_m_tau",        "T_linear_tau",      "T_lindblad_tau",
    "T_mlp_tau",      "F_linear",    "F_lindblad",  "F_mlp",            "tts_linear_tau",    "tts_lindblad_opt_tau",
    "tts_mlp_opt_tau", "G_lindblad", "G_mlp",       "residual_linear",  "residual_lindblad", "residual_mlp",
    "boundary_linear", "boundary_lindblad", "boundary_mlp"};

void write_speedup_row(Csv& csv, const exp::SpeedupRow& r) {
  csv.row({r.family, std::to_string(r.n), std::to_string(r.m), num(r.tau_m), num(r.T_linear), num(r.T_lindblad),
           num(r.T_mlp), num(r.F_linear), num(r.F_lindblad), num(r.F_mlp), num(r.tts_linear), num(r.tts_lindblad),
           num(r.tts_mlp), num(r.G_lindblad), num(r.G_mlp), num(r.residual_linear), num(r.residual_lindblad),
           num(r.residual_mlp), r.boundary_linear ? "1" : "0", r.boundary_lindblad ? "1" : "0",
           r.boundary_mlp ? "1" : "0"});
}

void cmd_speedup(Run& run, const SpeedupOpts& o) {
  const auto kind = sat::parse_instance_kind(o.family);
  const double tau_m = o.tau_m.value_or(kind == sat::InstanceKind::random3sat ? 2.0 : 5.0);
  if (o.bracket.size() != 2) throw RangeError("--bracket takes two values");
  exp::SpeedupConfig cfg;
  cfg.T_lo = o.bracket[0];
  cfg.T_hi = o.bracket[1];
  cfg.grid_size = o.grid;
  cfg.tf_tolerance = o.tf_tol;
  cfg.grape = grape_config(o.grape);
  std::vector<exp::SpeedupTask> tasks;
  for (int n : parse_range(o.n)) tasks.push_back({o.family, kind, n, tau_m, o.seed});
  const auto rows = exp::run_speedup(tasks, cfg, o.threads);
  Csv csv(run.file("speedup.csv"), kSpeedupHeader);
  json g = json::array();
  for (const auto& r : rows) {
    write_speedup_row(csv, r);
    g.push_back({{"n", r.n}, {"G_lindblad", r.G_lindblad}, {"G_mlp", r.G_mlp}});
  }
  csv.close();
  run.summary["speedup"] = g;
}

// ---------------------------------------------------------------- reproduce

struct ReproduceOpts {
  std::string figure;
  std::uint64_t seed = 0;
  int shots = 10000;
  int threads = 0;
  bool quick = false;
};

void write_curves(Csv& sched, Csv& fid, const std::string& prefix, const exp::FidelityCurve& c) {
  const auto s = dyn::schedule_from_values(static_cast<int>(c.values.cols()), c.T_f, c.values);
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    std::vector<std::string> row{prefix, num(c.T_f), c.label, num(s.times[k])};
    for (double th : s.axes[k]) row.push_back(num(th));
    sched.row(row);
  }
  for (std::size_t k = 0; k < c.times.size(); ++k)
    fid.row({prefix, num(c.T_f), c.label, num(c.times[k]), num(c.fidelity[k])});
}

void reproduce_fig3(Run& run, const ReproduceOpts& o) {
  exp::Fig3Config cfg;
  if (o.quick) {
    cfg.horizons = {1.0};
    cfg.grid_size = 20;
    cfg.grape.max_iters = 20;
    cfg.spectrum_points = 11;
  }
  const auto res = exp::run_fig3(cfg);
  Csv spec(run.file("fig3_spectrum.csv"), spectrum_header(cfg.n));
  write_spectrum(spec, res.spectrum);
  spec.close();
  Csv sched(run.file("fig3_schedules.csv"), {"set", "T_f_tau", "schedule", "t_tau", "theta_rad"});
  Csv fid(run.file("fig3_fidelity.csv"), {"set", "T_f_tau", "schedule", "t_tau", "fidelity"});
  json finals = json::array();
  for (const auto& c : res.curves) {
    write_curves(sched, fid, "fig3", c);
    finals.push_back({{"T_f", c.T_f}, {"schedule", c.label}, {"final_fidelity", c.final_fidelity}});
  }
  sched.close();
  fid.close();
  run.summary["final_fidelities"] = finals;
}

void reproduce_fig4(Run& run, const ReproduceOpts& o) {
  exp::Fig4Config cfg;
  cfg.shots = o.shots;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  if (o.quick) {
    cfg.grid_size = 20;
    cfg.grape.max_iters = 20;
  }
  const auto res = exp::run_fig4(cfg);
  Csv sum(run.file("fig4_summary.csv"), {"schedule", "lindblad_fidelity", "mean", "variance", "std_error", "cutoff",
                                         "retained_fraction", "post_selected_mean", "post_selected_std_error"});
  Csv hist(run.file("fig4_histogram.csv"), {"schedule", "bin_lo_fidelity", "bin_hi_fidelity", "count"});
  Csv sched(run.file("fig4_schedules.csv"), {"schedule", "t_tau", "theta_rad"});
  json js = json::object();
  for (const auto& a : res.arms) {
    write_finals(run, "fig4_" + a.label + "_shots.csv", a.final_fidelities);
    const auto& s = a.summary;
    sum.row({a.label, num(a.lindblad_fidelity), num(s.mean), num(s.variance), num(s.std_error), num(*s.cutoff),
             num(s.retained_fraction), s.post_selected_mean ? num(*s.post_selected_mean) : "nan",
             s.post_selected_std_error ? num(*s.post_selected_std_error) : "nan"});
    for (std::size_t b = 0; b < s.histogram.size(); ++b)
      hist.row({a.label, num(s.bin_edges[b]), num(s.bin_edges[b + 1]), std::to_string(s.histogram[b])});
    const auto sc = dyn::schedule_from_values(cfg.n, cfg.T_f, a.values);
    for (std::size_t k = 0; k < sc.times.size(); ++k) sched.row({a.label, num(sc.times[k]), num(sc.axes[k][0])});
    js[a.label] = summary_json(s);
  }
  sum.close();
  hist.close();
  sched.close();
  run.summary["ensembles"] = js;
}

void reproduce_fig5(Run& run, const ReproduceOpts& o) {
  exp::Fig5Config cfg;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  if (o.quick) {
    cfg.ring_sizes = {2};
    cfg.random3sat_sizes = {3};
    cfg.speedup.grid_size = 10;
    cfg.speedup.grape.max_iters = 5;
    cfg.speedup.tf_tolerance = 1.0;
  }
  const auto rows = exp::run_fig5(cfg);
  Csv csv(run.file("fig5_speedup.csv"), kSpeedupHeader);
  json g = json::array();
  for (const auto& r : rows) {
    write_speedup_row(csv, r);
    g.push_back({{"family", r.family}, {"n", r.n}, {"G_lindblad", r.G_lindblad}, {"G_mlp", r.G_mlp}});
  }
  csv.close();
  run.summary["speedup"] = g;
}

void reproduce_fig6(Run& run, const ReproduceOpts& o) {
  exp::Fig6Config cfg;
  cfg.seed = o.seed;
  if (o.quick) {
    cfg.grid_size = 10;
    cfg.grape.max_iters = 10;
  }
  const auto res = exp::run_fig6(cfg);
  Csv dist(run.file("fig6_distance.csv"), {"instance", "iteration", "d_l2_rad_sqrt_tau"});
  Csv sched(run.file("fig6_schedules.csv"),
            {"instance", "T_f_tau", "schedule", "t_tau", "theta_1_rad", "theta_2_rad", "theta_3_rad"});
  Csv fid(run.file("fig6_fidelity.csv"), {"instance", "T_f_tau", "schedule", "t_tau", "fidelity"});
  json js = json::array();
  for (const auto& r : res) {
    for (std::size_t k = 0; k < r.distance_trace.size(); ++k)
      dist.row({r.label, std::to_string(k), num(r.distance_trace[k])});
    for (const auto* c : {&r.multi, &r.single, &r.linear}) {
      exp::FidelityCurve wide = *c;
      if (wide.values.cols() == 1) wide.values = wide.values.replicate(1, 3).eval();
      write_curves(sched, fid, r.label, wide);
    }
    js.push_back({{"instance", r.label},
                  {"d_l2_initial", r.distance_trace.front()},
                  {"d_l2_final", r.distance_trace.back()},
                  {"fidelity_multi", r.multi.final_fidelity},
                  {"fidelity_single", r.single.final_fidelity},
                  {"fidelity_linear", r.linear.final_fidelity}});
  }
  dist.close();
  sched.close();
  fid.close();
  run.summary["instances"] = js;
}

void cmd_reproduce(Run& run, const ReproduceOpts& o) {
  if (o.figure == "fig3") return reproduce_fig3(run, o);
  if (o.figure == "fig4") return reproduce_fig4(run, o);
  if (o.figure == "fig5") return reproduce_fig5(run, o);
  if (o.figure == "fig6") return reproduce_fig6(run, o);
  throw RangeError("figure must be fig3, fig4, fig5 or fig6");
}

// ---------------------------------------------------------------- driver

bool is_flag(const CLI::Option* opt) { return opt->get_expected_max() == 0 || opt->get_type_size() == 0; }

/// Turns a flat JSON config into flag tokens for `sub`.
std::vector<std::string> config_tokens(CLI::App* sub, const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError("config '" + path.string() + "': " + e.what());
  }
  if (j.contains("config") && j["config"].is_object()) j = j["config"];
  if (!j.is_object()) throw ParseError("config '" + path.string() + "' must be a JSON object");
  std::vector<std::string> tokens;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "subcommand") {
      if (it.value() != sub->get_name())
        throw CLI::ValidationError("config is for subcommand '" + it.value().get<std::string>() + "'");
      continue;
    }
    std::string flag = "--" + it.key();
    std::replace(flag.begin(), flag.end(), '_', '-');
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (!opt) throw CLI::ValidationError("config key '" + it.key() + "' is not an option of " + sub->get_name());
    const json& v = it.value();
    if (is_flag(opt)) {
      if ((v.is_boolean() && v.get<bool>()) || (v.is_string() && v.get<std::string>() == "true")) tokens.push_back(flag);
      continue;
    }
    auto text = [](const json& x) { return x.is_string() ? x.get<std::string>() : x.dump(); };
    if (v.is_null() || (v.is_array() && v.empty()) || (v.is_string() && v.get<std::string>().empty())) continue;
    tokens.push_back(flag);
    if (v.is_array())
      for (const auto& e : v) tokens.push_back(text(e));
    else
      tokens.push_back(text(v));
  }
  return tokens;
}

int exit_for(const std::exception& e, int code) {
  std::cerr << "error: " << e.what() << '\n';
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Zeno dragging schedules: simulation, bounds and optimal control", "zeno"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Registry reg;
  std::string config_file, out_dir;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "flat JSON config (or a previous manifest); flags win");
    reg.opt(sub, "--out-dir", out_dir, std::string("output directory (env ") + kOutDirEnv + ")");
  };

  GenOpts gen;
  auto* s_gen = app.add_subcommand("gen", "generate a SAT instance as DIMACS");
  reg.opt(s_gen, "--kind", gen.inst.kind, "ring2sat | single_solution_ring | random3sat")->required();
  reg.opt(s_gen, "--n", gen.inst.n, "number of variables")->required();
  reg.opt(s_gen, "--seed", gen.inst.seed, "seed");
  reg.opt(s_gen, "-o,--output", gen.output, "output CNF path")->required();
  common(s_gen);

  SpectrumOpts spec;
  auto* s_spec = app.add_subcommand("spectrum", "eigenvalues of the cost operator over theta");
  add_instance_opts(reg, s_spec, spec.inst);
  reg.opt(s_spec, "--points", spec.points, "theta grid points");
  reg.opt(s_spec, "--theta-lo", spec.theta_lo, "first angle (rad)");
  reg.opt(s_spec, "--theta-hi", spec.theta_hi, "last angle (rad)");
  common(s_spec);

  DragOpts drag;
  auto* s_drag = app.add_subcommand("drag", "Zeno dragging under a fixed schedule");
  add_drag_opts(reg, s_drag, drag);
  reg.opt(s_drag, "--mode", drag.mode, "kraus | sme | lindblad");
  reg.opt(s_drag, "--trace-shots", drag.trace_shots, "trajectories whose traces are written");
  common(s_drag);

  PlanOpts plan;
  auto* s_plan = app.add_subcommand("plan", "sufficient linear dragging plan");
  add_instance_opts(reg, s_plan, plan.inst);
  add_meas_opts(reg, s_plan, plan.meas);
  reg.opt(s_plan, "--eps1", plan.eps1, "adiabatic error budget");
  reg.opt(s_plan, "--eps2", plan.eps2, "mixing error budget");
  reg.opt(s_plan, "--theta-i", plan.theta_i, "start angle (rad)");
  reg.opt(s_plan, "--theta-f", plan.theta_f, "end angle (rad)");
  reg.opt(s_plan, "--first-step", plan.first_step, "optional large first increment (rad)");
  reg.opt(s_plan, "--gap-floor", plan.gap_floor, "smallest gap accepted");
  reg.flag(s_plan, "--execute", plan.execute, "run the plan through the averaged channel");
  reg.opt(s_plan, "--kraus-shots", plan.kraus_shots, "sampled Kraus executions");
  common(s_plan);

  OptimizeOpts opt;
  auto* s_opt = app.add_subcommand("optimize", "optimize a dragging schedule");
  add_instance_opts(reg, s_opt, opt.inst);
  add_meas_opts(reg, s_opt, opt.meas);
  add_grape_opts(reg, s_opt, opt.grape);
  reg.opt(s_opt, "--problem", opt.problem, "lindblad_ofs | lindblad_ot | mlp_ofs | mlp_ot");
  reg.opt(s_opt, "--T-f", opt.T_f, "horizon (tau)");
  reg.opt(s_opt, "--bracket", opt.bracket, "T_f search bracket lo hi (tau), optimal-time problems")->expected(2);
  reg.opt(s_opt, "--grid", opt.grid, "control intervals");
  reg.opt(s_opt, "--tau-m", opt.tau_m, "readout time regularizer (tau)");
  reg.flag(s_opt, "--per-qubit", opt.per_qubit, "one schedule per qubit");
  reg.opt(s_opt, "--tf-tol", opt.tf_tol, "golden-section tolerance on T_f (tau)");
  reg.opt(s_opt, "--perturb", opt.perturb, "seeded perturbation of the initial ramp (rad)");
  common(s_opt);

  DragOpts ens;
  ens.mode = "sme";
  ens.shots = 10000;
  ens.cutoff = 0.05;
  auto* s_ens = app.add_subcommand("ensemble", "trajectory ensemble statistics");
  add_drag_opts(reg, s_ens, ens);
  reg.opt(s_ens, "--mode", ens.mode, "kraus | sme");
  common(s_ens);

  QubitOpts qo;
  auto* s_q = app.add_subcommand("qubit-analytic", "closed-form single-qubit schedules");
  reg.opt(s_q, "--phi-i", qo.phi_i, "initial Bloch angle (rad)");
  reg.opt(s_q, "--phi-f", qo.phi_f, "target Bloch angle (rad)");
  reg.opt(s_q, "--gamma", qo.gamma, "measurement rate (1/tau)");
  reg.opt(s_q, "--T-f", qo.T_f, "horizon (tau)");
  reg.opt(s_q, "--points", qo.points, "time samples");
  reg.opt(s_q, "--weight", qo.weight, "running cost weight of the most likely path");
  common(s_q);

  SpeedupOpts sp;
  auto* s_sp = app.add_subcommand("speedup", "relative speedup of optimized schedules");
  reg.opt(s_sp, "--family", sp.family, "single_solution_ring | random3sat");
  reg.opt(s_sp, "--n", sp.n, "sizes, e.g. 2..5 or 2,3,4");
  reg.opt(s_sp, "--tau-m", sp.tau_m, "readout time (tau); 5 for 2-SAT, 2 for 3-SAT by default");
  reg.opt(s_sp, "--seed", sp.seed, "seed");
  reg.opt(s_sp, "--bracket", sp.bracket, "T_f search bracket lo hi (tau)")->expected(2);
  reg.opt(s_sp, "--grid", sp.grid, "control intervals");
  reg.opt(s_sp, "--tf-tol", sp.tf_tol, "golden-section tolerance on T_f (tau)");
  reg.opt(s_sp, "--threads", sp.threads, "worker threads (0 = hardware)");
  add_grape_opts(reg, s_sp, sp.grape);
  common(s_sp);

  ReproduceOpts rp;
  auto* s_rp = app.add_subcommand("reproduce", "canned figure pipelines");
  reg.opt(s_rp, "--figure", rp.figure, "fig3 | fig4 | fig5 | fig6")->required();
  reg.opt(s_rp, "--seed", rp.seed, "seed");
  reg.opt(s_rp, "--shots", rp.shots, "trajectories per ensemble (fig4)");
  reg.opt(s_rp, "--threads", rp.threads, "worker threads (0 = hardware)");
  reg.flag(s_rp, "--quick", rp.quick, "small settings for smoke runs");
  common(s_rp);

  std::vector<std::string> argv_store{"zeno"};
  try {
    // Config files expand into flags placed before the user's own flags.
    std::vector<std::string> user(args.begin(), args.end());
    bool out_dir_flag = false;
    std::optional<std::string> cfg_path;
    for (std::size_t i = 0; i < user.size(); ++i) {
      if (user[i] == "--out-dir" || user[i].rfind("--out-dir=", 0) == 0) out_dir_flag = true;
      if (user[i] == "--config" && i + 1 < user.size()) cfg_path = user[i + 1];
      if (user[i].rfind("--config=", 0) == 0) cfg_path = user[i].substr(9);
    }
    std::vector<std::string> full;
    if (cfg_path && !user.empty()) {
      CLI::App* sub = app.get_subcommand_no_throw(user.front());
      if (!sub) throw CLI::ExtrasError({user.front()});
      full.push_back(user.front());
      for (auto& t : config_tokens(sub, *cfg_path)) full.push_back(t);
      full.insert(full.end(), user.begin() + 1, user.end());
    } else {
      full = user;
    }
    argv_store.insert(argv_store.end(), full.begin(), full.end());
    std::vector<const char*> argv;
    for (const auto& s : argv_store) argv.push_back(s.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());

    if (!out_dir_flag) {
      if (const char* env = std::getenv(kOutDirEnv); env && *env) out_dir = env;
    }
    if (out_dir.empty()) out_dir = "zeno_out";

    CLI::App* sub = app.get_subcommands().front();
    Run run;
    run.sub = sub;
    run.out_dir = out_dir;
    std::error_code ec;
    fs::create_directories(run.out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + run.out_dir.string() + "': " + ec.message());

    const auto t0 = std::chrono::steady_clock::now();
    const std::string name = sub->get_name();
    std::uint64_t seed = 0;
    fs::path manifest = run.out_dir / "manifest.json";
    if (name == "gen") {
      cmd_gen(run, gen);
      seed = gen.inst.seed;
      manifest = fs::path(gen.output).string() + ".manifest.json";
    } else if (name == "spectrum") {
      cmd_spectrum(run, spec);
      seed = spec.inst.seed;
    } else if (name == "drag") {
      cmd_drag(run, drag);
      seed = drag.inst.seed;
    } else if (name == "plan") {
      cmd_plan(run, plan);
      seed = plan.inst.seed;
    } else if (name == "optimize") {
      cmd_optimize(run, opt);
      seed = opt.inst.seed;
    } else if (name == "ensemble") {
      cmd_ensemble(run, ens);
      seed = ens.inst.seed;
    } else if (name == "qubit-analytic") {
      cmd_qubit(run, qo);
    } else if (name == "speedup") {
      cmd_speedup(run, sp);
      seed = sp.seed;
    } else if (name == "reproduce") {
      cmd_reproduce(run, rp);
      seed = rp.seed;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json m;
    m["tool"] = "zeno";
    m["version"] = kVersion;
    m["subcommand"] = name;
    m["seed"] = seed;
    m["config"] = reg.echo(sub);
    m["outputs"] = run.outputs;
    m["summary"] = run.summary;
    m["timings"] = {{"wall_seconds", wall}};
    write_json(manifest, m);
    return kOk;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  } catch (const IoError& e) {
    return exit_for(e, kIo);
  } catch (const ParseError& e) {
    return exit_for(e, kParse);
  } catch (const RangeError& e) {
    return exit_for(e, kRange);
  } catch (const NumericalError& e) {
    return exit_for(e, kNumerical);
  } catch (const std::exception& e) {
    return exit_for(e, kFailure);
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace zeno::cli
