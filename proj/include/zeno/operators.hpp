#pragma once

#include <vector>

#include "zeno/linalg.hpp"
#include "zeno/sat.hpp"

namespace zeno::ops {

/// Eigenvalues below this count as zero when the solution span is unavailable.
inline constexpr double kZeroTol = 1e-9;
/// Axis angles with |sin theta| below this are treated as degenerate.
inline constexpr double kAxisTol = 1e-6;

/// One measurement angle per qubit.
using Axis = std::vector<double>;

Axis uniform_axis(int n, double theta);

/// |l theta> = R_y(pi + l theta)|+>, R_y(phi) = exp(-i phi sigma_y / 2).
Vec axis_state(int sign, double theta);
/// d|l theta>/d theta.
Vec axis_state_derivative(int sign, double theta);

/// Full 2^n x 2^n clause projector, identity on qubits outside the clause.
Mat clause_projector(const sat::Clause& clause, const Axis& axis, int n);

/// d P / d theta_q for the clause's `slot`-th variable q = clause.vars[slot].
Mat clause_projector_derivative(const sat::Clause& clause, const Axis& axis, int n, std::size_t slot);

/// All m clause projectors at one axis.
std::vector<Mat> clause_projectors(const sat::SatInstance& instance, const Axis& axis);

/// Projectors and their per-slot derivatives at one axis.
struct ProjectorSet {
  std::vector<Mat> P;
  std::vector<std::vector<Mat>> dP;  // dP[alpha][slot]
};

ProjectorSet projector_set(const sat::SatInstance& instance, const Axis& axis, bool with_derivatives);

struct CostOperator {
  Mat matrix;
  Vec eigenvalues;
  Mat eigenvectors;
  Mat ground_projector;
  Mat ground_basis;
  int ground_dim = 0;
  double gap = 0.0;
};

CostOperator cost_operator(const sat::SatInstance& instance, const Axis& axis);

/// First eigenvalue above the ground space, or 0 if there is none.
double spectral_gap(const sat::SatInstance& instance, const Axis& axis);

/// Minimum of <psi|Pi0(axis2)|psi> over normalized psi in the range of Pi0(axis).
double groundspace_overlap(const sat::SatInstance& instance, const Axis& axis, const Axis& axis2);

/// Diagonal projector onto the computational basis states of the solutions.
Mat solution_projector(const sat::SatInstance& instance);

/// |+...+><+...+|.
Mat plus_state(int n);

void check_axis(const Axis& axis, int n);

}  // namespace zeno::ops
