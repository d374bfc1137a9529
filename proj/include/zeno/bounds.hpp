#pragma once

#include <functional>
#include <vector>

#include "zeno/dynamics.hpp"
#include "zeno/linalg.hpp"
#include "zeno/sat.hpp"

namespace zeno::bounds {

/// rho = f rho0 + (1 - f) rho_perp + gamma (c + c^T), Pi0 c = c, c Pi0 = 0.
struct BlockDecomposition {
  double f = 0.0;
  Mat rho0_block;
  Mat rho_perp_block;
  double gamma = 0.0;
  Mat c_block;
};

BlockDecomposition block_decompose(const Mat& rho, const Mat& Pi0, double tol = 1e-10);

/// Tr[c^T pinv(rho0) c] with eigenvalue cutoff `cutoff`.
double coherence_weight(const BlockDecomposition& b, double cutoff = 1e-10);

/// f delta - 2 (1 - beta G)^M sqrt(a(delta) f (1 - f)).
double fidelity_bound(double f, double delta, double betaG, int M);

/// a(delta): delta - delta^2 on [1/2, 1], 1/4 below.
double bound_a(double delta);

inline constexpr double kGapFloor = 1e-6;

struct DragPlan {
  int n = 0;
  double theta_i = 0.0;
  double theta_f = 0.0;
  double delta_theta = 0.0;
  int N = 0;
  std::vector<double> thetas;  // theta_k at which the channel is applied, k = 1..N
  std::vector<double> gaps;
  std::vector<int> M_per_step;
  double epsilon1 = 0.0;
  double epsilon2 = 0.0;
  double log_numerator = 0.0;  // log(1/eps2) + log(n)/2 + log(theta_f - theta_i)
  double dt = 0.0;
  double tau = 1.0;
  double beta = 0.0;
  double gap_min = 0.0;
  long long total_applications = 0;
  double total_time = 0.0;  // per-step sum: dt * sum_k M_k
  double upsilon = 0.0;
  /// Optional first increment of size first_step; remaining angle split evenly.
  double first_step = 0.0;
};

struct PlanOptions {
  double gap_floor = kGapFloor;
  /// Large first increment Delta theta_0; 0 disables it.
  double first_step = 0.0;
};

DragPlan plan_linear_drag(int n, double theta_i, double theta_f, double eps1, double eps2,
                          const dyn::MeasurementConfig& cfg, const std::function<double(double)>& gap_fn,
                          const PlanOptions& opt = {});

/// dt / (1 - exp(-dt / 2 tau)), with the limit 2 tau for dt < 1e-12.
double upsilon(double dt, double tau);

struct CorollaryTime {
  /// log-numerator / G_min * N * Upsilon: the closed-form guarantee.
  double total_time = 0.0;
  /// N * M_uniform * dt with M_uniform from G_min.
  double uniform_time = 0.0;
  /// dt * sum_k M_k from the per-step plan.
  double per_step_time = 0.0;
  double upsilon = 0.0;
  int M_uniform = 0;
};

CorollaryTime corollary_time(const DragPlan& plan, const dyn::MeasurementConfig& cfg);

/// Deterministic execution through the averaged channel, starting in the
/// ground state of O(theta_i) (the projection of |+...+> onto it).
struct PlanExecution {
  double final_fidelity = 0.0;
  std::vector<double> fidelity_per_step;
};

PlanExecution execute_plan(const sat::SatInstance& instance, const DragPlan& plan, const dyn::MeasurementConfig& cfg);

/// Monte Carlo execution with sampled Kraus measurements (random clause per slice).
std::vector<double> execute_plan_kraus(const sat::SatInstance& instance, const DragPlan& plan,
                                       const dyn::MeasurementConfig& cfg, std::uint64_t seed, int shots);

}  // namespace zeno::bounds
