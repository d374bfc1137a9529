#pragma once

#include <Eigen/Dense>

#include <vector>

namespace zeno {

// Every operator in the clause model is real symmetric (the rotations are about
// the y axis), so real arithmetic represents all states and costates exactly.
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline void symmetrize(Mat& x) { x = (0.5 * (x + x.transpose())).eval(); }

template <class M>
double max_abs(const M& x) {
  return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
}

/// Tr(A B) without forming the product.
template <class A, class B>
double trace_product(const A& a, const B& b) {
  return (a.transpose().array() * b.array()).sum();
}

/// Ascending eigenvalues and orthonormal eigenvectors (columns).
struct EigenSystem {
  Vec values;
  Mat vectors;
};

/// Dense symmetric eigendecomposition; throws NumericalError on failure.
EigenSystem symmetric_eigen(const Mat& h);

/// Projector onto the eigenvectors whose eigenvalue is below `tol`.
Mat low_eigenspace_projector(const EigenSystem& es, double tol);

/// Kronecker product of a list of square factors, first factor most significant.
Mat kron_all(const std::vector<Mat>& factors);

}  // namespace zeno
