#include "zeno/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zeno/error.hpp"
#include "zeno/operators.hpp"

namespace zeno::bounds {

BlockDecomposition block_decompose(const Mat& rho, const Mat& Pi0, double tol) {
  const Eigen::Index d = rho.rows();
  const Mat Q = Mat::Identity(d, d) - Pi0;
  BlockDecomposition b;
  b.f = trace_product(Pi0, rho);
  const Mat in = Pi0 * rho * Pi0;
  const Mat out = Q * rho * Q;
  const Mat off = Pi0 * rho * Q;
  b.gamma = off.norm();
  if ((b.f < tol || b.f > 1.0 - tol) && b.gamma > tol)
    throw RangeError("coherence block is nonzero at fidelity " + std::to_string(b.f) + ": state is not positive");
  b.rho0_block = b.f > tol ? Mat(in / b.f) : Mat::Zero(d, d);
  b.rho_perp_block = b.f < 1.0 - tol ? Mat(out / (1.0 - b.f)) : Mat::Zero(d, d);
  if (b.gamma > tol) {
    b.c_block = off / b.gamma;
  } else {
    b.gamma = 0.0;
    b.c_block = Mat::Zero(d, d);
  }
  return b;
}

double coherence_weight(const BlockDecomposition& b, double cutoff) {
  const Mat off = b.gamma * b.c_block;
  const EigenSystem es = symmetric_eigen(b.f * b.rho0_block);
  Mat pinv = Mat::Zero(off.rows(), off.rows());
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (es.values(i) > cutoff) pinv += es.vectors.col(i) * es.vectors.col(i).transpose() / es.values(i);
  return trace_product(off.transpose(), Mat(pinv * off));
}

double bound_a(double delta) { return delta >= 0.5 ? delta - delta * delta : 0.25; }

double fidelity_bound(double f, double delta, double betaG, int M) {
  if (f < 0.0 || f > 1.0 || delta < 0.0 || delta > 1.0 || betaG < 0.0 || betaG > 1.0 || M < 1)
    throw RangeError("fidelity_bound arguments out of range");
  return f * delta - 2.0 * std::pow(1.0 - betaG, M) * std::sqrt(bound_a(delta) * f * (1.0 - f));
}

double upsilon(double dt, double tau) {
  if (dt < 1e-12) return 2.0 * tau;
  return dt / -std::expm1(-dt / (2.0 * tau));
}

namespace {

int repetitions(double log_numerator, double beta_gap) {
  const double denom = -std::log1p(-beta_gap);
  const double M = std::ceil(log_numerator / denom);
  if (!std::isfinite(M) || M > 2e9) throw RangeError("channel repetition count overflows");
  return std::max(1, static_cast<int>(M));
}

}  // namespace

DragPlan plan_linear_drag(int n, double theta_i, double theta_f, double eps1, double eps2,
                          const dyn::MeasurementConfig& cfg, const std::function<double(double)>& gap_fn,
                          const PlanOptions& opt) {
  dyn::validate(cfg);
  if (n < 1) throw RangeError("n must be >= 1");
  if (!(theta_i > 0.0) || !(theta_f > theta_i)) throw RangeError("plan needs theta_f > theta_i > 0");
  if (!(eps1 > 0.0 && eps1 < 1.0) || !(eps2 > 0.0 && eps2 < 1.0)) throw RangeError("error budgets must lie in (0, 1)");
  if (!(cfg.dt > 0.0)) throw RangeError("plan needs dt > 0");
  if (opt.first_step < 0.0 || opt.first_step >= theta_f - theta_i) throw RangeError("first step out of range");

  DragPlan p;
  p.n = n;
  p.theta_i = theta_i;
  p.theta_f = theta_f;
  p.epsilon1 = eps1;
  p.epsilon2 = eps2;
  p.dt = cfg.dt;
  p.tau = cfg.tau;
  p.beta = dyn::beta(cfg);
  p.first_step = opt.first_step;
  const double span = theta_f - theta_i;
  p.log_numerator = std::log(1.0 / eps2) + 0.5 * std::log(static_cast<double>(n)) + std::log(span);
  const double rest = span - opt.first_step;
  p.N = static_cast<int>(std::ceil(n * rest * rest / (4.0 * eps1) - 1e-12));
  p.N = std::max(p.N, 1);
  p.delta_theta = rest / p.N;
  const double start = theta_i + opt.first_step;
  if (opt.first_step > 0.0) p.thetas.push_back(start);
  for (int k = 1; k <= p.N; ++k) p.thetas.push_back(k == p.N ? theta_f : start + k * p.delta_theta);
  p.gap_min = std::numeric_limits<double>::infinity();
  for (double th : p.thetas) {
    const double g = gap_fn(th);
    if (!(g > opt.gap_floor))
      throw RangeError("gap too small for finite plan: G(" + std::to_string(th) + ") = " + std::to_string(g));
    p.gaps.push_back(g);
    p.gap_min = std::min(p.gap_min, g);
    const int M = repetitions(p.log_numerator, p.beta * g);
    p.M_per_step.push_back(M);
    p.total_applications += M;
  }
  p.total_time = p.dt * static_cast<double>(p.total_applications);
  p.upsilon = upsilon(p.dt, p.tau);
  return p;
}

CorollaryTime corollary_time(const DragPlan& plan, const dyn::MeasurementConfig& cfg) {
  dyn::validate(cfg);
  CorollaryTime c;
  c.upsilon = upsilon(cfg.dt, cfg.tau);
  c.total_time = plan.log_numerator / plan.gap_min * plan.N * c.upsilon;
  const double beta_gap = dyn::beta(cfg) * plan.gap_min;
  const double M = std::max(1.0, std::ceil(plan.log_numerator / -std::log1p(-beta_gap)));
  c.M_uniform = M > 2e9 ? std::numeric_limits<int>::max() : static_cast<int>(M);
  c.uniform_time = static_cast<double>(plan.thetas.size()) * M * cfg.dt;
  c.per_step_time = plan.total_time;
  return c;
}

namespace {

Mat initial_ground_state(const sat::SatInstance& instance, double theta_i) {
  const int n = instance.num_vars();
  const auto op = ops::cost_operator(instance, ops::uniform_axis(n, theta_i));
  const Mat plus = ops::plus_state(n);
  Mat rho = op.ground_projector * plus * op.ground_projector;
  if (rho.trace() < 1e-12) rho = op.eigenvectors.col(0) * op.eigenvectors.col(0).transpose();
  rho /= rho.trace();
  return rho;
}

}  // namespace

PlanExecution execute_plan(const sat::SatInstance& instance, const DragPlan& plan, const dyn::MeasurementConfig& cfg) {
  if (plan.n != instance.num_vars()) throw RangeError("plan was made for a different n");
  const int n = instance.num_vars();
  dyn::MeasurementConfig c = cfg;
  c.dt = plan.dt;
  c.tau = plan.tau;
  const Mat target = ops::cost_operator(instance, ops::uniform_axis(n, plan.theta_f)).ground_projector;
  Mat rho = initial_ground_state(instance, plan.theta_i);
  PlanExecution out;
  for (std::size_t k = 0; k < plan.thetas.size(); ++k) {
    const auto P = ops::clause_projectors(instance, ops::uniform_axis(n, plan.thetas[k]));
    for (int r = 0; r < plan.M_per_step[k]; ++r) rho = dyn::averaged_channel(rho, P, c);
    out.fidelity_per_step.push_back(dyn::fidelity(rho, target));
  }
  out.final_fidelity = out.fidelity_per_step.back();
  return out;
}

std::vector<double> execute_plan_kraus(const sat::SatInstance& instance, const DragPlan& plan,
                                       const dyn::MeasurementConfig& cfg, std::uint64_t seed, int shots) {
  if (plan.n != instance.num_vars()) throw RangeError("plan was made for a different n");
  const int n = instance.num_vars();
  dyn::MeasurementConfig c = cfg;
  c.dt = plan.dt;
  c.tau = plan.tau;
  const Mat target = ops::cost_operator(instance, ops::uniform_axis(n, plan.theta_f)).ground_projector;
  const Mat rho0 = initial_ground_state(instance, plan.theta_i);
  std::vector<std::vector<Mat>> P;
  for (double th : plan.thetas) P.push_back(ops::clause_projectors(instance, ops::uniform_axis(n, th)));
  const std::size_t m = instance.num_clauses();
  std::vector<double> out;
  for (int s = 0; s < shots; ++s) {
    Rng rng = substream(seed, 2, static_cast<std::uint64_t>(s));
    Mat rho = rho0;
    for (std::size_t k = 0; k < plan.thetas.size(); ++k)
      for (int r = 0; r < plan.M_per_step[k]; ++r)
        rho = dyn::sample_measurement(rho, P[k][static_cast<std::size_t>(rng() % m)], c, rng).state;
    out.push_back(dyn::fidelity(rho, target));
  }
  return out;
}

}  // namespace zeno::bounds
