#include "zeno/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "zeno/error.hpp"

namespace zeno::ctl {

ProblemKind parse_problem_kind(std::string_view name) {
  if (name == "lindblad_ofs") return ProblemKind::lindblad_ofs;
  if (name == "lindblad_ot") return ProblemKind::lindblad_ot;
  if (name == "mlp_ofs") return ProblemKind::mlp_ofs;
  if (name == "mlp_ot") return ProblemKind::mlp_ot;
  throw RangeError("unknown problem kind '" + std::string(name) + "'");
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::lindblad_ofs: return "lindblad_ofs";
    case ProblemKind::lindblad_ot: return "lindblad_ot";
    case ProblemKind::mlp_ofs: return "mlp_ofs";
    case ProblemKind::mlp_ot: return "mlp_ot";
  }
  return "?";
}

bool is_mlp(ProblemKind kind) { return kind == ProblemKind::mlp_ofs || kind == ProblemKind::mlp_ot; }
bool is_ot(ProblemKind kind) { return kind == ProblemKind::lindblad_ot || kind == ProblemKind::mlp_ot; }

void validate(const ControlProblem& p) {
  if (!(p.T_f > 0.0) || !std::isfinite(p.T_f)) throw RangeError("T_f must be > 0");
  if (p.grid_size < 2) throw RangeError("grid size must be >= 2");
  if (is_ot(p.kind) && !(p.tau_m > 0.0)) throw RangeError("tau_m must be > 0 for optimal-time problems");
  if (!(p.max_step > 0.0)) throw RangeError("max_step must be > 0");
  dyn::validate(p.measurement);
  if (is_mlp(p.kind)) {
    if (p.measurement.tau != 1.0) throw RangeError("most-likely-path problems use tau = 1");
    if (p.measurement.rate_share != dyn::RateShare::per_clause)
      throw RangeError("most-likely-path problems use the per-clause rate share");
  }
  const Eigen::Index d = Eigen::Index{1} << p.instance.num_vars();
  if (p.initial_state && (p.initial_state->rows() != d || p.initial_state->cols() != d))
    throw RangeError("initial state has the wrong dimension");
  if (p.target && (p.target->rows() != d || p.target->cols() != d)) throw RangeError("target has the wrong dimension");
}

int track_count(const ControlProblem& p) { return p.per_qubit ? p.instance.num_vars() : 1; }

Mat initial_state(const ControlProblem& p) {
  return p.initial_state ? *p.initial_state : ops::plus_state(p.instance.num_vars());
}

Mat target_projector(const ControlProblem& p) {
  return p.target ? *p.target : ops::solution_projector(p.instance);
}

Mat linear_values(const ControlProblem& p) {
  Mat v(p.grid_size, track_count(p));
  for (int j = 0; j < p.grid_size; ++j) v.row(j).setConstant(0.5 * std::numbers::pi * (j + 0.5) / p.grid_size);
  return v;
}

namespace {

constexpr double kWeights[4] = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};

ops::Axis axis_from(const Mat& values, int j, int n) {
  ops::Axis a(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) a[q] = values(j, values.cols() == 1 ? 0 : q);
  return a;
}

void check_values(const ControlProblem& p, const Mat& values) {
  if (values.rows() != p.grid_size || values.cols() != track_count(p))
    throw RangeError("schedule values must be " + std::to_string(p.grid_size) + " x " + std::to_string(track_count(p)));
  if (!values.allFinite()) throw NumericalError("schedule contains non-finite angles");
}

Mat values_from_schedule(const ControlProblem& p, const dyn::Schedule& s) {
  s.validate(p.instance.num_vars());
  if (s.intervals() != p.grid_size) throw RangeError("schedule grid does not match the problem grid");
  const Mat v = dyn::schedule_values(s);
  if (p.per_qubit) return v;
  if (!dyn::is_global(s)) throw RangeError("per-qubit schedule given to a global problem");
  return v.col(0);
}

struct Grid {
  int N = 0;
  double len = 0.0;  // interval length
  int K = 0;         // substeps per interval
  double h = 0.0;
};

Grid make_grid(const ControlProblem& p) {
  Grid g;
  g.N = p.grid_size;
  g.len = p.T_f / g.N;
  const std::size_t m = p.instance.num_clauses();
  const double mprime = dyn::share_count(p.measurement, m);
  const double h_max = std::min(p.max_step, 0.1 * p.measurement.tau * mprime / static_cast<double>(m));
  g.K = std::max(1, static_cast<int>(std::ceil(g.len / h_max - 1e-9)));
  g.h = g.len / g.K;
  return g;
}

template <class Sys>
Mat rk4_forward(const Sys& sys, const Mat& y, double h, double& q) {
  const Mat k1 = sys.rhs(y);
  const Mat y2 = y + 0.5 * h * k1;
  const Mat k2 = sys.rhs(y2);
  const Mat y3 = y + 0.5 * h * k2;
  const Mat k3 = sys.rhs(y3);
  const Mat y4 = y + h * k3;
  const Mat k4 = sys.rhs(y4);
  q += h * (kWeights[0] * sys.cost(y) + kWeights[1] * sys.cost(y2) + kWeights[2] * sys.cost(y3) +
            kWeights[3] * sys.cost(y4));
  return y + h * (kWeights[0] * k1 + kWeights[1] * k2 + kWeights[2] * k3 + kWeights[3] * k4);
}

// Reverse-mode sweep through one RK4 step: returns dJ/dy given a = dJ/dy_next and
// lets the system accumulate parameter sensitivities at every stage.
template <class Sys>
Mat rk4_backward(Sys& sys, const Mat& y, double h, const Mat& a) {
  const Mat k1 = sys.rhs(y);
  const Mat y2 = y + 0.5 * h * k1;
  const Mat k2 = sys.rhs(y2);
  const Mat y3 = y + 0.5 * h * k2;
  const Mat k3 = sys.rhs(y3);
  const Mat y4 = y + h * k3;
  Mat g1 = (h * kWeights[0]) * a, g2 = (h * kWeights[1]) * a, g3 = (h * kWeights[2]) * a;
  const Mat g4 = (h * kWeights[3]) * a;
  Mat ybar = a;
  Mat t = sys.vjp(y4, g4, h * kWeights[3]);
  sys.accumulate(y4, g4, h * kWeights[3]);
  g3 += h * t;
  ybar += t;
  t = sys.vjp(y3, g3, h * kWeights[2]);
  sys.accumulate(y3, g3, h * kWeights[2]);
  g2 += 0.5 * h * t;
  ybar += t;
  t = sys.vjp(y2, g2, h * kWeights[1]);
  sys.accumulate(y2, g2, h * kWeights[1]);
  g1 += 0.5 * h * t;
  ybar += t;
  t = sys.vjp(y, g1, h * kWeights[0]);
  sys.accumulate(y, g1, h * kWeights[0]);
  ybar += t;
  return ybar;
}

struct LindbladSys {
  const ops::ProjectorSet* ps;
  const sat::SatInstance* inst;
  double rate;
  int tracks;
  Vec grad;

  Mat rhs(const Mat& y) const { return dyn::lindblad_rhs(y, ps->P, rate); }
  double cost(const Mat&) const { return 0.0; }
  Mat vjp(const Mat&, const Mat& g, double) const { return dyn::lindblad_rhs(g, ps->P, rate); }
  void accumulate(const Mat& y, const Mat& g, double) {
    if (ps->dP.empty()) return;
    const Mat A = y * g;
    for (std::size_t a = 0; a < ps->P.size(); ++a) {
      const Mat B = (y * ps->P[a]) * g;
      const auto& c = inst->clause(a);
      for (std::size_t i = 0; i < c.size(); ++i) {
        const Mat& dP = ps->dP[a][i];
        grad(tracks == 1 ? 0 : c.vars[i]) += rate * (2.0 * trace_product(dP, B) - trace_product(dP, A));
      }
    }
  }
};

struct CdjSys {
  const ops::ProjectorSet* ps;
  const sat::SatInstance* inst;
  std::vector<double> r;
  double w;
  int tracks;
  double inv_m;
  Vec grad;
  // Picard statistics per clause: sum cw * 2<P>, sum Tr(gbar H), sum cw.
  Vec sum_p, sum_h;
  double sum_w = 0.0;
  Vec dr;  // dJ/dr

  Mat rhs(const Mat& y) const {
    Mat out = Mat::Zero(y.rows(), y.cols());
    for (std::size_t a = 0; a < ps->P.size(); ++a) {
      const Mat py = ps->P[a] * y;
      const double p = py.trace();
      out += (r[a] - 1.0) * (py + py.transpose() - 2.0 * p * y);
    }
    return inv_m * out;
  }
  double cost(const Mat& y) const {
    double c = 0.0;
    for (std::size_t a = 0; a < ps->P.size(); ++a) {
      const double p = trace_product(ps->P[a], y);
      c += 0.5 * (r[a] - 2.0 * p) * (r[a] - 2.0 * p) + 2.0 * p - 2.0 * p * p;
    }
    return w * inv_m * c;
  }
  Mat vjp(const Mat& y, const Mat& g, double cw) const {
    Mat out = Mat::Zero(y.rows(), y.cols());
    const double gy = trace_product(g, y);
    for (std::size_t a = 0; a < ps->P.size(); ++a) {
      const Mat& P = ps->P[a];
      const Mat gp = g * P;
      const double p = trace_product(P, y);
      out += (r[a] - 1.0) * (gp + gp.transpose() - 2.0 * p * g - (2.0 * gy + 2.0 * w * cw) * P);
    }
    return inv_m * out;
  }
  void accumulate(const Mat& y, const Mat& g, double cw) {
    const Mat A = y * g;
    const double gy = A.trace();
    for (std::size_t a = 0; a < ps->P.size(); ++a) {
      const Mat& P = ps->P[a];
      const double p = trace_product(P, y);
      const double th = 2.0 * trace_product(P, A) - 2.0 * p * gy;  // Tr(g H_a(y))
      dr(a) += inv_m * th + cw * w * inv_m * (r[a] - 2.0 * p);
      sum_p(a) += cw * 2.0 * p;
      sum_h(a) += th;
      if (a == 0) sum_w += cw;
      if (ps->dP.empty()) continue;
      const auto& c = inst->clause(a);
      for (std::size_t i = 0; i < c.size(); ++i) {
        const Mat& dP = ps->dP[a][i];
        const double dp = trace_product(dP, y);
        grad(tracks == 1 ? 0 : c.vars[i]) +=
            inv_m * (r[a] - 1.0) * (2.0 * trace_product(dP, A) - 2.0 * gy * dp) - cw * 2.0 * w * inv_m * (r[a] - 1.0) * dp;
      }
    }
  }
};

std::vector<ops::ProjectorSet> interval_projectors(const ControlProblem& p, const Mat& values, bool derivatives) {
  std::vector<ops::ProjectorSet> out;
  out.reserve(static_cast<std::size_t>(p.grid_size));
  for (int j = 0; j < p.grid_size; ++j)
    out.push_back(ops::projector_set(p.instance, axis_from(values, j, p.instance.num_vars()), derivatives));
  return out;
}

double terminal_cost(const ControlProblem& p, double F) {
  if (!is_ot(p.kind)) return -F;
  if (!(F > 0.0)) throw NumericalError("terminal fidelity is not positive");
  return std::log(p.T_f + p.tau_m) - std::log(F);
}

Mat terminal_adjoint(const ControlProblem& p, const Mat& Pi, double F) {
  return is_ot(p.kind) ? Mat(-Pi / F) : Mat(-Pi);
}

void check_finite(const Mat& y, double t) {
  if (!y.allFinite()) {
    std::ostringstream msg;
    msg << "state became non-finite at t = " << t;
    throw NumericalError(msg.str());
  }
}

}  // namespace

PassResult adjoint_pass_lindblad(const ControlProblem& p, const Mat& values) {
  validate(p);
  if (is_mlp(p.kind)) throw RangeError("Lindblad pass called on a most-likely-path problem");
  check_values(p, values);
  const Grid g = make_grid(p);
  const int tracks = track_count(p);
  const double rate = 1.0 / (dyn::share_count(p.measurement, p.instance.num_clauses()) * p.measurement.tau);
  const auto ps = interval_projectors(p, values, true);
  const Mat Pi = target_projector(p);

  PassResult out;
  std::vector<std::vector<Mat>> ys(static_cast<std::size_t>(g.N));
  Mat y = initial_state(p);
  out.states.push_back(y);
  double q = 0.0;
  for (int j = 0; j < g.N; ++j) {
    LindbladSys sys{&ps[j], &p.instance, rate, tracks, Vec::Zero(tracks)};
    for (int s = 0; s < g.K; ++s) {
      ys[j].push_back(y);
      y = rk4_forward(sys, y, g.h, q);
      symmetrize(y);
    }
    check_finite(y, (j + 1) * g.len);
    out.states.push_back(y);
  }
  if (std::abs(y.trace() - 1.0) > 1e-8) throw NumericalError("trace drift in Lindblad pass");
  out.terminal_fidelity = trace_product(Pi, y);
  out.cost = terminal_cost(p, out.terminal_fidelity);

  out.gradient = Mat::Zero(g.N, tracks);
  out.costates.assign(static_cast<std::size_t>(g.N + 1), Mat());
  Mat a = terminal_adjoint(p, Pi, out.terminal_fidelity);
  out.costates[g.N] = -a;
  for (int j = g.N - 1; j >= 0; --j) {
    LindbladSys sys{&ps[j], &p.instance, rate, tracks, Vec::Zero(tracks)};
    for (int s = g.K - 1; s >= 0; --s) {
      a = rk4_backward(sys, ys[j][s], g.h, a);
      symmetrize(a);
    }
    out.gradient.row(j) = sys.grad.transpose() / g.len;
    out.costates[j] = -a;
  }
  return out;
}

PassResult adjoint_pass_lindblad(const ControlProblem& p, const dyn::Schedule& schedule) {
  return adjoint_pass_lindblad(p, values_from_schedule(p, schedule));
}

PassResult adjoint_pass_cdj(const ControlProblem& p, const Mat& values, double weight, const Mat* warm) {
  validate(p);
  if (!is_mlp(p.kind)) throw RangeError("most-likely-path pass called on a Lindblad problem");
  if (!(weight > 0.0)) throw RangeError("running cost weight must be > 0");
  check_values(p, values);
  const Grid g = make_grid(p);
  const int tracks = track_count(p);
  const auto m = static_cast<Eigen::Index>(p.instance.num_clauses());
  const auto ps = interval_projectors(p, values, true);
  const Mat Pi = target_projector(p);
  const Mat rho0 = initial_state(p);

  Mat r;
  bool seeded = false;
  if (warm && warm->rows() == m && warm->cols() == g.N && warm->allFinite()) {
    r = *warm;
    seeded = true;
  } else {
    r = Mat::Zero(m, g.N);
  }

  auto make_sys = [&](int j) {
    CdjSys sys{&ps[j], &p.instance, std::vector<double>(static_cast<std::size_t>(m)), weight, tracks,
               1.0 / static_cast<double>(m), Vec::Zero(tracks), Vec::Zero(m), Vec::Zero(m), 0.0, Vec::Zero(m)};
    for (Eigen::Index a = 0; a < m; ++a) sys.r[a] = r(a, j);
    return sys;
  };

  double omega = 1.0;
  double last_res = std::numeric_limits<double>::infinity();
  for (int sweep = 1; sweep <= p.fixed_point_cap; ++sweep) {
    PassResult out;
    std::vector<std::vector<Mat>> ys(static_cast<std::size_t>(g.N));
    Mat y = rho0;
    out.states.push_back(y);
    double q = 0.0;
    for (int j = 0; j < g.N; ++j) {
      if (!seeded)
        for (Eigen::Index a = 0; a < m; ++a) r(a, j) = 2.0 * trace_product(ps[j].P[a], y);
      const CdjSys sys = make_sys(j);
      for (int s = 0; s < g.K; ++s) {
        ys[j].push_back(y);
        y = rk4_forward(sys, y, g.h, q);
        symmetrize(y);
      }
      check_finite(y, (j + 1) * g.len);
      y /= y.trace();
      out.states.push_back(y);
    }
    seeded = true;
    out.terminal_fidelity = trace_product(Pi, y);
    out.running_cost = q;
    out.cost = q + terminal_cost(p, out.terminal_fidelity);

    out.gradient = Mat::Zero(g.N, tracks);
    out.costates.assign(static_cast<std::size_t>(g.N + 1), Mat());
    Mat a = terminal_adjoint(p, Pi, out.terminal_fidelity);
    out.costates[g.N] = -a;
    Mat r_new(m, g.N);
    for (int j = g.N - 1; j >= 0; --j) {
      CdjSys sys = make_sys(j);
      for (int s = g.K - 1; s >= 0; --s) {
        a = rk4_backward(sys, ys[j][s], g.h, a);
        symmetrize(a);
      }
      out.gradient.row(j) = sys.grad.transpose() / g.len;
      out.costates[j] = -a;
      for (Eigen::Index al = 0; al < m; ++al) r_new(al, j) = (sys.sum_p(al) - sys.sum_h(al) / weight) / sys.sum_w;
    }
    if (!r_new.allFinite()) throw NumericalError("most-likely-path readouts became non-finite");
    const double res = max_abs(Mat(r_new - r));
    out.readouts = r;
    out.sweeps = sweep;
    out.fixed_point_residual = res;
    if (res < p.fixed_point_tol) return out;
    if (res > last_res) omega = std::max(0.05, 0.5 * omega);
    last_res = res;
    r += omega * (r_new - r);
  }
  std::ostringstream msg;
  msg << "most-likely-path readouts did not converge in " << p.fixed_point_cap << " sweeps (residual " << last_res
      << ")";
  throw NumericalError(msg.str());
}

PassResult adjoint_pass_cdj(const ControlProblem& p, const dyn::Schedule& schedule, double weight) {
  return adjoint_pass_cdj(p, values_from_schedule(p, schedule), weight);
}

PassResult adjoint_pass(const ControlProblem& p, const Mat& values, double weight, const Mat* warm) {
  return is_mlp(p.kind) ? adjoint_pass_cdj(p, values, weight, warm) : adjoint_pass_lindblad(p, values);
}

double evaluate_cost(const ControlProblem& p, const Mat& values, double weight) {
  if (!is_mlp(p.kind)) {
    validate(p);
    check_values(p, values);
    const double F = lindblad_replay_fidelity(p, values);
    return terminal_cost(p, F);
  }
  return adjoint_pass_cdj(p, values, weight).cost;
}

double cdj_hamiltonian(const Mat& rho, const Mat& Lambda, const std::vector<double>& readouts, const ops::Axis& axis,
                       const sat::SatInstance& instance, double weight) {
  const auto P = ops::clause_projectors(instance, axis);
  if (readouts.size() != P.size()) throw RangeError("one readout per clause required");
  double h = 0.0;
  for (std::size_t a = 0; a < P.size(); ++a) {
    const Mat prho = P[a] * rho;
    const double p = prho.trace();
    const Mat F = (readouts[a] - 1.0) * (prho + prho.transpose() - 2.0 * p * rho);
    const double g = 2.0 * (trace_product(rho, Mat(P[a] * P[a])) - p * p);
    h += trace_product(Lambda, F) - weight * (0.5 * (readouts[a] - 2.0 * p) * (readouts[a] - 2.0 * p) + g);
  }
  return h / static_cast<double>(P.size());
}

double optimal_readout(const Mat& rho, const Mat& Lambda, const Mat& P, double weight) {
  const Mat prho = P * rho;
  const double p = prho.trace();
  return 2.0 * p + trace_product(Lambda, Mat(prho + prho.transpose() - 2.0 * p * rho)) / weight;
}

Mat cdj_costate_rhs_raw(const Mat& rho, const Mat& L, const std::vector<Mat>& P, const std::vector<double>& r,
                        double weight) {
  Mat out = Mat::Zero(L.rows(), L.cols());
  const double l = trace_product(L, rho);
  for (std::size_t a = 0; a < P.size(); ++a) {
    const double p = trace_product(P[a], rho);
    out += (r[a] - 1.0) * (P[a] * L + L * P[a] - 2.0 * p * L - 2.0 * (l - weight) * P[a]);
  }
  return -out / static_cast<double>(P.size());
}

Mat cdj_costate_rhs_shifted(const Mat& rho, const Mat& L, const std::vector<Mat>& P, const std::vector<double>& r) {
  const Eigen::Index d = L.rows();
  Mat F = Mat::Zero(d, d);
  for (std::size_t a = 0; a < P.size(); ++a)
    F += (r[a] - 1.0) * (P[a] - trace_product(P[a], rho) * Mat::Identity(d, d));
  F /= static_cast<double>(P.size());
  return -(F * L + L * F);
}

std::vector<double> lindblad_hamiltonian_trace(const ControlProblem& p, const Mat& values, const PassResult& pass) {
  const double rate = 1.0 / (dyn::share_count(p.measurement, p.instance.num_clauses()) * p.measurement.tau);
  std::vector<double> h;
  for (int j = 0; j <= p.grid_size; ++j) {
    const auto P = ops::clause_projectors(p.instance, axis_from(values, std::min(j, p.grid_size - 1), p.instance.num_vars()));
    h.push_back(trace_product(pass.costates[j], dyn::lindblad_rhs(pass.states[j], P, rate)));
  }
  return h;
}

void validate(const GrapeConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw RangeError("learning rate must be > 0");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) throw RangeError("momentum must lie in [0, 1)");
  if (cfg.max_iters < 0) throw RangeError("max_iters must be >= 0");
  if (cfg.clamp && !(cfg.theta_lo < cfg.theta_hi)) throw RangeError("clamp range is empty");
  if (!(cfg.cdj_running_cost_weight > 0.0)) throw RangeError("running cost weight must be > 0");
}

double lindblad_replay_fidelity(const ControlProblem& p, const Mat& values) {
  check_values(p, values);
  dyn::LindbladOptions opt;
  opt.max_step = p.max_step;
  const auto s = dyn::schedule_from_values(p.instance.num_vars(), p.T_f, values);
  return dyn::evolve_lindblad(initial_state(p), p.instance, s, p.measurement, target_projector(p), opt).fidelity.back();
}

double time_to_solution(double T_f, double tau_m, double fidelity) {
  if (!(fidelity > 0.0)) throw NumericalError("time to solution needs a positive fidelity");
  return (T_f + tau_m) / fidelity;
}

namespace {

Mat clamp_values(const Mat& v, const GrapeConfig& cfg) {
  return cfg.clamp ? Mat(v.cwiseMax(cfg.theta_lo).cwiseMin(cfg.theta_hi)) : v;
}

double projected_norm(const Mat& x, const Mat& grad, const GrapeConfig& cfg, double dt) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < grad.rows(); ++i)
    for (Eigen::Index k = 0; k < grad.cols(); ++k) {
      const double gk = grad(i, k);
      if (cfg.clamp && ((x(i, k) <= cfg.theta_lo && gk > 0.0) || (x(i, k) >= cfg.theta_hi && gk < 0.0))) continue;
      s += gk * gk;
    }
  return std::sqrt(s * dt);
}

}  // namespace

OptimizationResult nesterov_grape(const ControlProblem& p, const GrapeConfig& cfg,
                                  const std::optional<Mat>& initial_values, const IterationObserver& observer) {
  validate(p);
  validate(cfg);
  const double w = cfg.cdj_running_cost_weight;
  const double dt = p.T_f / p.grid_size;
  Mat b = clamp_values(initial_values ? *initial_values : linear_values(p), cfg);
  check_values(p, b);

  OptimizationResult res;
  PassResult best = adjoint_pass(p, b, w);
  ++res.evaluations;
  if (!std::isfinite(best.cost) || !best.gradient.allFinite()) throw NumericalError("non-finite cost at the initial schedule");
  res.cost_history.push_back(best.cost);
  res.gradient_norm_history.push_back(projected_norm(b, best.gradient, cfg, dt));
  if (observer) observer(0, b, best.cost);

  double eta = cfg.learning_rate;
  Mat x_prev = b;
  bool restarted = true;
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (res.gradient_norm_history.back() < cfg.grad_tol) {
      res.converged = true;
      break;
    }
    const Mat x_next = clamp_values(b - eta * best.gradient, cfg);
    const Mat y = restarted ? x_next : clamp_values(x_next + cfg.momentum * (x_next - x_prev), cfg);
    PassResult trial;
    bool ok = true;
    try {
      trial = adjoint_pass(p, y, w, best.readouts.size() ? &best.readouts : nullptr);
      ++res.evaluations;
      ok = std::isfinite(trial.cost) && trial.gradient.allFinite();
    } catch (const NumericalError&) {
      ok = false;
    }
    if (ok && trial.cost <= best.cost) {
      x_prev = x_next;
      b = y;
      best = std::move(trial);
      restarted = false;
      res.cost_history.push_back(best.cost);
      res.gradient_norm_history.push_back(projected_norm(b, best.gradient, cfg, dt));
      if (observer) observer(static_cast<int>(res.cost_history.size()) - 1, b, best.cost);
    } else {
      if (restarted) eta *= 0.5;
      restarted = true;
      ++res.restarts;
      if (eta < 1e-12 * cfg.learning_rate) break;
    }
  }
  if (!res.converged && res.gradient_norm_history.back() < cfg.grad_tol) res.converged = true;

  res.values = b;
  res.T_f = p.T_f;
  res.schedule = dyn::schedule_from_values(p.instance.num_vars(), p.T_f, b);
  res.iterations_used = static_cast<int>(res.cost_history.size());
  res.final_cost = best.cost;
  res.path_fidelity = best.terminal_fidelity;
  res.final_fidelity = is_mlp(p.kind) ? lindblad_replay_fidelity(p, b) : best.terminal_fidelity;
  if (is_mlp(p.kind)) res.optimal_readouts = best.readouts;
  res.tts = time_to_solution(p.T_f, p.tau_m, res.final_fidelity);
  return res;
}

double tf_stationarity(const ControlProblem& p, const OptimizationResult& result) {
  if (!is_ot(p.kind)) throw RangeError("stationarity residual is defined for optimal-time problems only");
  ControlProblem q = p;
  q.T_f = result.T_f;
  const PassResult pass = adjoint_pass(q, result.values, 1.0, result.optimal_readouts ? &*result.optimal_readouts : nullptr);
  const Mat Pi = target_projector(q);
  const Mat& rho = pass.states.back();
  const double F = trace_product(Pi, rho);
  const auto axis = axis_from(result.values, q.grid_size - 1, q.instance.num_vars());
  const auto P = ops::clause_projectors(q.instance, axis);
  const double lead = 1.0 / (q.T_f + q.tau_m);
  if (!is_mlp(q.kind)) {
    const double rate = 1.0 / (dyn::share_count(q.measurement, P.size()) * q.measurement.tau);
    return lead - trace_product(Pi, dyn::lindblad_rhs(rho, P, rate)) / F;
  }
  const Mat Lambda = Pi / F;
  double running = 0.0;
  Mat drift = Mat::Zero(rho.rows(), rho.cols());
  for (const Mat& Pa : P) {
    const double r = optimal_readout(rho, Lambda, Pa);
    const Mat prho = Pa * rho;
    const double pa = prho.trace();
    running += 0.5 * (r - 2.0 * pa) * (r - 2.0 * pa) + 2.0 * (pa - pa * pa);
    drift += (r - 1.0) * (prho + prho.transpose() - 2.0 * pa * rho);
  }
  const double inv_m = 1.0 / static_cast<double>(P.size());
  return lead + inv_m * running - inv_m * trace_product(Pi, drift) / F;
}

TfSearchResult optimize_tf(const ControlProblem& p, double T_lo, double T_hi, const GrapeConfig& cfg,
                           const TfSearchOptions& opt) {
  if (!(T_lo > 0.0) || !(T_hi > T_lo)) throw RangeError("T_f bracket must satisfy 0 < T_lo < T_hi");
  if (!is_ot(p.kind)) throw RangeError("optimize_tf needs an optimal-time problem kind");
  if (opt.fixed_linear && is_mlp(p.kind)) throw RangeError("the fixed linear baseline uses Lindblad dynamics");

  TfSearchResult out;
  std::optional<Mat> warm;
  std::vector<std::pair<double, OptimizationResult>> done;

  auto probe = [&](double T) -> double {
    ControlProblem q = p;
    q.T_f = T;
    OptimizationResult r;
    if (opt.fixed_linear) {
      r.values = linear_values(q);
      r.T_f = T;
      r.schedule = dyn::schedule_from_values(q.instance.num_vars(), T, r.values);
      r.final_fidelity = r.path_fidelity = lindblad_replay_fidelity(q, r.values);
      r.final_cost = std::log(T + q.tau_m) - std::log(r.final_fidelity);
      r.cost_history.push_back(r.final_cost);
      r.iterations_used = 1;
      r.converged = true;
    } else {
      if (q.kind == ProblemKind::lindblad_ot) q.kind = ProblemKind::lindblad_ofs;
      r = nesterov_grape(q, cfg, warm);
      warm = r.values;
    }
    r.T_f = T;
    r.tts = time_to_solution(T, p.tau_m, r.final_fidelity);
    // Lindblad: log TTS of the replayed schedule; most likely path: its optimal-time cost.
    const double objective = is_mlp(p.kind) ? r.final_cost : std::log(r.tts);
    out.probes.push_back({T, objective, r.final_fidelity});
    done.emplace_back(T, std::move(r));
    return objective;
  };

  constexpr double kInvPhi = 0.6180339887498949;
  double a = T_lo, b = T_hi;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = probe(c), fd = probe(d);
  int probes = 2;
  while (b - a > opt.tolerance && probes < opt.max_probes) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = probe(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = probe(d);
    }
    ++probes;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.probes.size(); ++i)
    if (out.probes[i].objective < out.probes[best].objective) best = i;
  out.T_f = done[best].first;
  out.result = std::move(done[best].second);
  out.at_boundary = out.T_f - T_lo < 2.0 * opt.tolerance || T_hi - out.T_f < 2.0 * opt.tolerance;
  if (!opt.fixed_linear) {
    ControlProblem q = p;
    q.T_f = out.T_f;
    out.result.tf_residual = tf_stationarity(q, out.result);
  } else {
    ControlProblem q = p;
    q.kind = ProblemKind::lindblad_ot;
    q.T_f = out.T_f;
    out.result.tf_residual = tf_stationarity(q, out.result);
  }
  return out;
}

double relative_speedup(double tts_opt, double tts_linear) {
  if (!(tts_opt > 0.0) || !(tts_linear > 0.0)) throw RangeError("time to solution must be > 0");
  return tts_opt / tts_linear;
}

double schedule_distance(const std::vector<std::vector<double>>& tracks, const std::vector<double>& times) {
  const std::size_t n = tracks.size();
  if (n < 2) throw RangeError("schedule distance needs at least two schedules");
  for (const auto& t : tracks)
    if (t.size() != times.size()) throw RangeError("schedules must share one grid");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double integral = 0.0;
      for (std::size_t k = 1; k < times.size(); ++k) {
        const double d0 = tracks[i][k - 1] - tracks[j][k - 1];
        const double d1 = tracks[i][k] - tracks[j][k];
        integral += 0.5 * (times[k] - times[k - 1]) * (d0 * d0 + d1 * d1);
      }
      total += std::sqrt(integral);
    }
  return total / static_cast<double>(n * (n - 1));
}

double schedule_distance(const dyn::Schedule& schedule) {
  const std::size_t n = schedule.axes.front().size();
  std::vector<std::vector<double>> tracks(n);
  for (const auto& a : schedule.axes)
    for (std::size_t q = 0; q < n; ++q) tracks[q].push_back(a[q]);
  return schedule_distance(tracks, schedule.times);
}

}  // namespace zeno::ctl
