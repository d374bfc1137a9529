#pragma once

#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zeno/dynamics.hpp"
#include "zeno/linalg.hpp"
#include "zeno/operators.hpp"
#include "zeno/sat.hpp"

namespace zeno::ctl {

enum class ProblemKind { lindblad_ofs, lindblad_ot, mlp_ofs, mlp_ot };

ProblemKind parse_problem_kind(std::string_view name);
std::string to_string(ProblemKind kind);
bool is_mlp(ProblemKind kind);
bool is_ot(ProblemKind kind);

struct ControlProblem {
  ProblemKind kind = ProblemKind::lindblad_ofs;
  sat::SatInstance instance;
  double T_f = 1.0;
  /// Number of piecewise-constant control intervals.
  int grid_size = 200;
  double tau_m = 5.0;
  bool per_qubit = false;
  dyn::MeasurementConfig measurement{};
  /// Defaults to |+...+><+...+|.
  std::optional<Mat> initial_state{};
  /// Defaults to the solution projector Pi0(pi/2).
  std::optional<Mat> target{};
  /// RK4 substep bound inside each control interval.
  double max_step = 0.05;
  /// Picard sweeps for the most-likely-path readouts.
  int fixed_point_cap = 200;
  double fixed_point_tol = 1e-8;
};

void validate(const ControlProblem& p);
int track_count(const ControlProblem& p);
Mat initial_state(const ControlProblem& p);
Mat target_projector(const ControlProblem& p);

/// Linear ramp 0 -> pi/2 sampled at interval midpoints, one column per track.
Mat linear_values(const ControlProblem& p);

/// Result of one forward/backward sweep. The gradient is dJ/dtheta per unit
/// time on each interval (J is minimized).
struct PassResult {
  double cost = 0.0;
  double terminal_fidelity = 0.0;  // Tr(Pi rho(T_f)) along the simulated path
  double running_cost = 0.0;
  Mat gradient;                // intervals x tracks
  std::vector<Mat> states;     // grid points 0..N
  std::vector<Mat> costates;   // Lambda at grid points 0..N
  Mat readouts;                // m x intervals (most likely path only)
  int sweeps = 0;
  double fixed_point_residual = 0.0;
};

PassResult adjoint_pass_lindblad(const ControlProblem& p, const Mat& values);
PassResult adjoint_pass_lindblad(const ControlProblem& p, const dyn::Schedule& schedule);

PassResult adjoint_pass_cdj(const ControlProblem& p, const Mat& values, double weight = 1.0,
                            const Mat* warm_readouts = nullptr);
PassResult adjoint_pass_cdj(const ControlProblem& p, const dyn::Schedule& schedule, double weight = 1.0);

PassResult adjoint_pass(const ControlProblem& p, const Mat& values, double weight = 1.0,
                        const Mat* warm_readouts = nullptr);

/// Cost J only (same discretization as the passes).
double evaluate_cost(const ControlProblem& p, const Mat& values, double weight = 1.0);

/// (1/m) sum_alpha { Tr(Lambda F_alpha) - w [ (r - 2<P>)^2 / 2 + 2 Var P ] }, tau = 1.
double cdj_hamiltonian(const Mat& rho, const Mat& Lambda, const std::vector<double>& readouts, const ops::Axis& axis,
                       const sat::SatInstance& instance, double weight = 1.0);

/// r* = 2 Tr(rho P) + Tr{Lambda (rho P + P rho - 2 rho Tr[rho P])} / w.
double optimal_readout(const Mat& rho, const Mat& Lambda, const Mat& P, double weight = 1.0);

/// Right-hand sides of the most-likely-path costate in the raw form and in the
/// shifted frame Lambda' = Lambda + (w - Tr(Lambda rho)) 1.
Mat cdj_costate_rhs_raw(const Mat& rho, const Mat& Lambda, const std::vector<Mat>& P, const std::vector<double>& r,
                        double weight);
Mat cdj_costate_rhs_shifted(const Mat& rho, const Mat& Lambda_shifted, const std::vector<Mat>& P,
                            const std::vector<double>& r);

/// Control Hamiltonian Tr(Lambda L[rho]) at each grid point (Lindblad kinds).
std::vector<double> lindblad_hamiltonian_trace(const ControlProblem& p, const Mat& values, const PassResult& pass);

struct GrapeConfig {
  double learning_rate = 0.05;
  double momentum = 0.9;
  int max_iters = 2000;
  double grad_tol = 1e-6;
  double theta_lo = 0.0;
  double theta_hi = std::numbers::pi / 2;
  bool clamp = true;
  double cdj_running_cost_weight = 1.0;
};

void validate(const GrapeConfig& cfg);

struct OptimizationResult {
  dyn::Schedule schedule;
  Mat values;  // intervals x tracks
  std::vector<double> cost_history;
  std::vector<double> gradient_norm_history;
  /// Tr(Pi rho(T_f)) with the schedule replayed through Lindblad dynamics.
  double final_fidelity = 0.0;
  /// Terminal fidelity along the optimized path (equals final_fidelity for Lindblad kinds).
  double path_fidelity = 0.0;
  double final_cost = 0.0;
  std::optional<Mat> optimal_readouts;
  bool converged = false;
  int iterations_used = 0;
  int evaluations = 0;
  int restarts = 0;
  std::optional<double> tf_residual;
  double T_f = 0.0;
  double tts = 0.0;
};

/// Called with (accepted iterate index, values, cost), starting at index 0.
using IterationObserver = std::function<void(int, const Mat&, double)>;

/// Projected-gradient Nesterov iteration with restart on cost increase.
OptimizationResult nesterov_grape(const ControlProblem& p, const GrapeConfig& cfg,
                                  const std::optional<Mat>& initial_values = std::nullopt,
                                  const IterationObserver& observer = {});

/// Tr(Pi rho(T_f)) for the schedule replayed through Lindblad dynamics.
double lindblad_replay_fidelity(const ControlProblem& p, const Mat& values);

/// (T_f + tau_m) / fidelity.
double time_to_solution(double T_f, double tau_m, double fidelity);

/// Lindblad: 1/(T_f + tau_m) - Tr(Pi L[rho(T_f)]) / Tr(Pi rho(T_f)).
/// Most likely path: 1/(T_f + tau_m) + running cost density at T_f - Tr(Pi F) / Tr(Pi rho(T_f)).
double tf_stationarity(const ControlProblem& p, const OptimizationResult& result);

struct TfProbe {
  double T_f = 0.0;
  double objective = 0.0;
  double fidelity = 0.0;
};

struct TfSearchResult {
  double T_f = 0.0;
  OptimizationResult result;
  std::vector<TfProbe> probes;
  bool at_boundary = false;
};

struct TfSearchOptions {
  double tolerance = 1e-2;
  int max_probes = 40;
  /// Keep the linear ramp and optimize T_f only.
  bool fixed_linear = false;
};

TfSearchResult optimize_tf(const ControlProblem& p, double T_lo, double T_hi, const GrapeConfig& cfg,
                           const TfSearchOptions& opt = {});

double relative_speedup(double tts_opt, double tts_linear);

/// (1/(n(n-1))) sum_{i != j} ||theta_i - theta_j||_{l2}, trapezoid rule on the grid.
double schedule_distance(const std::vector<std::vector<double>>& tracks, const std::vector<double>& times);
/// Per-qubit tracks of one schedule.
double schedule_distance(const dyn::Schedule& schedule);

}  // namespace zeno::ctl
