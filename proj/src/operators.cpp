#include "zeno/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "zeno/error.hpp"

namespace zeno::ops {

Axis uniform_axis(int n, double theta) { return Axis(static_cast<std::size_t>(n), theta); }

void check_axis(const Axis& axis, int n) {
  if (static_cast<int>(axis.size()) != n)
    throw RangeError("axis has " + std::to_string(axis.size()) + " angles, expected " + std::to_string(n));
  for (double t : axis)
    if (!std::isfinite(t)) throw RangeError("axis angle is not finite");
}

Vec axis_state(int sign, double theta) {
  const double a = 0.75 * std::numbers::pi + 0.5 * sign * theta;
  return Eigen::Vector2d(std::cos(a), std::sin(a));
}

Vec axis_state_derivative(int sign, double theta) {
  const double a = 0.75 * std::numbers::pi + 0.5 * sign * theta;
  return 0.5 * sign * Eigen::Vector2d(-std::sin(a), std::cos(a));
}

namespace {

Mat local_factor(int sign, double theta) {
  const Vec v = axis_state(sign, theta);
  return v * v.transpose();
}

Mat local_factor_derivative(int sign, double theta) {
  const Vec v = axis_state(sign, theta);
  const Vec dv = axis_state_derivative(sign, theta);
  return dv * v.transpose() + v * dv.transpose();
}

Mat build(const sat::Clause& clause, const Axis& axis, int n, int derivative_slot) {
  std::vector<Mat> factors(static_cast<std::size_t>(n), Mat::Identity(2, 2));
  for (std::size_t i = 0; i < clause.size(); ++i) {
    const int q = clause.vars[i];
    if (q < 0 || q >= n) throw RangeError("clause variable " + std::to_string(q + 1) + " outside 1.." + std::to_string(n));
    factors[q] = static_cast<int>(i) == derivative_slot ? local_factor_derivative(clause.sign(i), axis[q])
                                                        : local_factor(clause.sign(i), axis[q]);
  }
  return kron_all(factors);
}

}  // namespace

Mat clause_projector(const sat::Clause& clause, const Axis& axis, int n) {
  check_axis(axis, n);
  return build(clause, axis, n, -1);
}

Mat clause_projector_derivative(const sat::Clause& clause, const Axis& axis, int n, std::size_t slot) {
  check_axis(axis, n);
  if (slot >= clause.size()) throw RangeError("clause slot out of range");
  return build(clause, axis, n, static_cast<int>(slot));
}

std::vector<Mat> clause_projectors(const sat::SatInstance& instance, const Axis& axis) {
  check_axis(axis, instance.num_vars());
  std::vector<Mat> out;
  out.reserve(instance.num_clauses());
  for (const auto& c : instance.clauses()) out.push_back(build(c, axis, instance.num_vars(), -1));
  return out;
}

ProjectorSet projector_set(const sat::SatInstance& instance, const Axis& axis, bool with_derivatives) {
  ProjectorSet s;
  s.P = clause_projectors(instance, axis);
  if (with_derivatives) {
    s.dP.resize(instance.num_clauses());
    for (std::size_t a = 0; a < instance.num_clauses(); ++a) {
      const auto& c = instance.clause(a);
      for (std::size_t i = 0; i < c.size(); ++i)
        s.dP[a].push_back(build(c, axis, instance.num_vars(), static_cast<int>(i)));
    }
  }
  return s;
}

CostOperator cost_operator(const sat::SatInstance& instance, const Axis& axis) {
  const auto P = clause_projectors(instance, axis);
  const Eigen::Index d = P.front().rows();
  CostOperator op;
  op.matrix = Mat::Zero(d, d);
  for (const Mat& p : P) op.matrix += p;
  op.matrix /= static_cast<double>(P.size());
  symmetrize(op.matrix);
  EigenSystem es = symmetric_eigen(op.matrix);
  op.eigenvalues = es.values;
  op.eigenvectors = es.vectors;
  op.ground_dim = 0;
  while (op.ground_dim < d && es.values(op.ground_dim) < kZeroTol) ++op.ground_dim;
  // Satisfiable instances: the kernel is spanned by rotated solution product states.
  const auto n = instance.num_vars();
  bool distinct = n <= sat::kMaxEnumerationVars;
  for (double t : axis) distinct = distinct && std::abs(std::sin(t)) > kAxisTol;
  const auto sols = distinct ? sat::enumerate_solutions(instance) : std::vector<sat::Assignment>{};
  if (!sols.empty()) {
    Mat V(d, static_cast<Eigen::Index>(sols.size()));
    for (std::size_t k = 0; k < sols.size(); ++k) {
      std::vector<Mat> factors;
      for (int q = 0; q < n; ++q) {
        const Vec v = axis_state(sols[k].values[q] ? +1 : -1, axis[q]);
        factors.push_back(Eigen::Vector2d(-v(1), v(0)));
      }
      V.col(static_cast<Eigen::Index>(k)) = kron_all(factors);
    }
    Eigen::HouseholderQR<Mat> qr(V);
    op.ground_basis = qr.householderQ() * Mat::Identity(d, V.cols());
    op.ground_dim = static_cast<int>(V.cols());
  } else {
    op.ground_basis = es.vectors.leftCols(op.ground_dim);
  }
  op.ground_projector = op.ground_basis * op.ground_basis.transpose();
  op.gap = op.ground_dim < d ? es.values(op.ground_dim) : 0.0;
  return op;
}

double spectral_gap(const sat::SatInstance& instance, const Axis& axis) { return cost_operator(instance, axis).gap; }

double groundspace_overlap(const sat::SatInstance& instance, const Axis& axis, const Axis& axis2) {
  const CostOperator a = cost_operator(instance, axis);
  const CostOperator b = cost_operator(instance, axis2);
  if (a.ground_dim != b.ground_dim)
    throw RangeError("groundspace dimension changes between axes (" + std::to_string(a.ground_dim) + " vs " +
                     std::to_string(b.ground_dim) + ")");
  if (a.ground_dim == 0) throw RangeError("empty groundspace");
  const Mat& V = a.ground_basis;
  const Mat restricted = V.transpose() * b.ground_projector * V;
  return std::clamp(symmetric_eigen(restricted).values(0), 0.0, 1.0);
}

Mat solution_projector(const sat::SatInstance& instance) {
  const auto sols = sat::enumerate_solutions(instance);
  const Eigen::Index d = Eigen::Index{1} << instance.num_vars();
  Mat pi = Mat::Zero(d, d);
  for (const auto& s : sols) {
    const auto i = static_cast<Eigen::Index>(sat::basis_index(s));
    pi(i, i) = 1.0;
  }
  return pi;
}

Mat plus_state(int n) {
  const Eigen::Index d = Eigen::Index{1} << n;
  return Mat::Constant(d, d, 1.0 / static_cast<double>(d));
}

}  // namespace zeno::ops
