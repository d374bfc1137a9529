#include "zeno/linalg.hpp"

#include <sstream>

#include "zeno/error.hpp"

namespace zeno {

EigenSystem symmetric_eigen(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(h);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "symmetric eigendecomposition failed (dim " << h.rows() << ", max |entry| " << max_abs(h)
        << ", asymmetry " << max_abs(Mat(h - h.transpose())) << ")";
    throw NumericalError(msg.str());
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Mat low_eigenspace_projector(const EigenSystem& es, double tol) {
  const Eigen::Index d = es.values.size();
  Eigen::Index k = 0;
  while (k < d && es.values(k) < tol) ++k;
  const auto v = es.vectors.leftCols(k);
  return v * v.transpose();
}

Mat kron_all(const std::vector<Mat>& factors) {
  Mat out = Mat::Ones(1, 1);
  for (const Mat& f : factors) {
    Mat next(out.rows() * f.rows(), out.cols() * f.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j)
        next.block(i * f.rows(), j * f.cols(), f.rows(), f.cols()) = out(i, j) * f;
    out = std::move(next);
  }
  return out;
}

}  // namespace zeno
