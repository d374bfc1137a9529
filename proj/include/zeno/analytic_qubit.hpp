#pragma once

#include <functional>

#include "zeno/dynamics.hpp"
#include "zeno/linalg.hpp"
#include "zeno/sat.hpp"

namespace zeno::qubit {

/// Single qubit measured along sigma(theta) = cos(theta) sigma_x + sin(theta) sigma_z
/// at rate Gamma, dragged from the +1 eigenstate of sigma(phi_i) toward sigma(phi_f).
struct QubitDragSpec {
  double phi_i = 0.0;
  double phi_f = 1.5707963267948966;
  double gamma_rate = 0.25;
  double T_f = 1.0;
};

void validate(const QubitDragSpec& spec);

/// theta*(t) = phi_i + (phi_f - phi_i) t / T_f + atan((phi_f - phi_i) / (4 Gamma T_f)).
double mlp_schedule(const QubitDragSpec& spec, double t);

/// Root of sin(phi_f - phi) = (phi - phi_i) / (Gamma T_f) between phi_i and phi_f.
double solve_phi_tf(const QubitDragSpec& spec);

/// Residual of the endpoint equation at phi.
double phi_tf_residual(const QubitDragSpec& spec, double phi);

/// theta(t) = phi_i + (phi(T_f) - phi_i) t / T_f + (phi_f - phi(T_f)) / 2.
double lindblad_schedule(const QubitDragSpec& spec, double t);

/// J* = exp(-[1 - cos(phi_f - phi(T_f))] Gamma T_f) cos(phi_f - phi(T_f)).
double optimal_cost(const QubitDragSpec& spec);

/// Endpoint phi(T_f) of the most likely path when the terminal reward is
/// c Tr(rho Pi_target) = c (1 + <sigma(phi_f)>) / 2 and the running cost has
/// weight w: solves w x / (4 Gamma T_f) = (c / 2) sin(phi_f - phi_i - x), x = phi(T_f) - phi_i.
double mlp_endpoint(const QubitDragSpec& spec, double weight = 1.0, double terminal_coef = 1.0);

/// The linear most-likely-path schedule through the given endpoint:
/// phi_i + x t / T_f + atan(x / (4 Gamma T_f)).
double mlp_schedule_to(const QubitDragSpec& spec, double phi_end, double t);

/// The clause (~b1): its projector is (1 - sigma(theta)) / 2.
sat::SatInstance qubit_instance();

/// (1 + sigma(phi)) / 2 in the computational basis.
Mat bloch_state(double phi);

/// sigma(phi).
Mat sigma(double phi);

/// tau = 1 / (4 Gamma).
dyn::MeasurementConfig measurement_config(const QubitDragSpec& spec);

/// Tr(rho(T_f) sigma(phi_f)) after Lindblad evolution under theta(t) sampled at
/// interval midpoints of a uniform grid.
double replay_cost(const QubitDragSpec& spec, const std::function<double(double)>& theta, int intervals);

}  // namespace zeno::qubit
