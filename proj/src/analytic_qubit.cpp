#include "zeno/analytic_qubit.hpp"

#include <cmath>
#include <numbers>

#include "zeno/error.hpp"

namespace zeno::qubit {

void validate(const QubitDragSpec& spec) {
  if (!(spec.gamma_rate > 0.0)) throw RangeError("Gamma must be > 0");
  if (!(spec.T_f > 0.0)) throw RangeError("T_f must be > 0");
  if (!std::isfinite(spec.phi_i) || !std::isfinite(spec.phi_f)) throw RangeError("angles must be finite");
}

namespace {

void check_time(const QubitDragSpec& spec, double t) {
  if (t < 0.0 || t > spec.T_f) throw RangeError("t outside [0, T_f]");
}

// Bisection on a bracket whose endpoint residuals have opposite signs.
template <class F>
double bisect(F&& g, double lo, double hi) {
  double glo = g(lo);
  if (glo == 0.0) return lo;
  const double ghi = g(hi);
  if (ghi == 0.0) return hi;
  if ((glo > 0.0) == (ghi > 0.0)) throw RangeError("no sign change in bracket");
  for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double mlp_schedule(const QubitDragSpec& spec, double t) {
  validate(spec);
  check_time(spec, t);
  const double d = spec.phi_f - spec.phi_i;
  return spec.phi_i + d * t / spec.T_f + std::atan(d / (4.0 * spec.gamma_rate * spec.T_f));
}

double phi_tf_residual(const QubitDragSpec& spec, double phi) {
  return std::sin(spec.phi_f - phi) - (phi - spec.phi_i) / (spec.gamma_rate * spec.T_f);
}

double solve_phi_tf(const QubitDragSpec& spec) {
  validate(spec);
  const double d = spec.phi_f - spec.phi_i;
  if (std::abs(d) >= std::numbers::pi) throw RangeError("|phi_f - phi_i| must be below pi");
  if (d == 0.0) return spec.phi_i;
  return bisect([&](double x) { return phi_tf_residual(spec, x); }, spec.phi_i, spec.phi_f);
}

double lindblad_schedule(const QubitDragSpec& spec, double t) {
  check_time(spec, t);
  const double p = solve_phi_tf(spec);
  return spec.phi_i + (p - spec.phi_i) * t / spec.T_f + 0.5 * (spec.phi_f - p);
}

double optimal_cost(const QubitDragSpec& spec) {
  const double p = solve_phi_tf(spec);
  const double c = std::cos(spec.phi_f - p);
  return std::exp(-(1.0 - c) * spec.gamma_rate * spec.T_f) * c;
}

double mlp_endpoint(const QubitDragSpec& spec, double weight, double terminal_coef) {
  validate(spec);
  if (!(weight > 0.0) || !(terminal_coef > 0.0)) throw RangeError("weights must be > 0");
  const double d = spec.phi_f - spec.phi_i;
  if (std::abs(d) >= std::numbers::pi) throw RangeError("|phi_f - phi_i| must be below pi");
  if (d == 0.0) return spec.phi_i;
  const double T = 4.0 * spec.gamma_rate * spec.T_f;
  const double x = bisect([&](double x) { return 0.5 * terminal_coef * std::sin(d - x) - weight * x / T; }, 0.0, d);
  return spec.phi_i + x;
}

double mlp_schedule_to(const QubitDragSpec& spec, double phi_end, double t) {
  validate(spec);
  check_time(spec, t);
  const double x = phi_end - spec.phi_i;
  return spec.phi_i + x * t / spec.T_f + std::atan(x / (4.0 * spec.gamma_rate * spec.T_f));
}

sat::SatInstance qubit_instance() { return sat::SatInstance(1, {sat::Clause{{0}, {true}}}); }

Mat sigma(double phi) {
  Mat s(2, 2);
  s << std::sin(phi), std::cos(phi), std::cos(phi), -std::sin(phi);
  return s;
}

Mat bloch_state(double phi) { return 0.5 * (Mat::Identity(2, 2) + sigma(phi)); }

dyn::MeasurementConfig measurement_config(const QubitDragSpec& spec) {
  validate(spec);
  dyn::MeasurementConfig cfg;
  cfg.tau = 1.0 / (4.0 * spec.gamma_rate);
  return cfg;
}

double replay_cost(const QubitDragSpec& spec, const std::function<double(double)>& theta, int intervals) {
  const auto cfg = measurement_config(spec);
  Mat values(intervals, 1);
  for (int j = 0; j < intervals; ++j) values(j, 0) = theta(spec.T_f * (j + 0.5) / intervals);
  const auto schedule = dyn::schedule_from_values(1, spec.T_f, values);
  dyn::LindbladOptions opt;
  opt.max_step = 0.02 * cfg.tau;
  const auto tr = dyn::evolve_lindblad(bloch_state(spec.phi_i), qubit_instance(), schedule, cfg, sigma(spec.phi_f), opt);
  return tr.fidelity.back();
}

}  // namespace zeno::qubit
