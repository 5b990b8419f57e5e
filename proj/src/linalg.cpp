#include "dareg/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <stdexcept>

namespace dareg::linalg {

namespace {

void require_symmetric(const Matrix& s, const char* what) {
  if (s.rows() != s.cols()) {
    throw std::invalid_argument(std::string(what) + ": matrix is not square");
  }
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument(std::string(what) +
                                ": matrix is not symmetric");
  }
}

Eigen::SelfAdjointEigenSolver<Matrix> spd_eigen(const Matrix& s,
                                                const char* what) {
  require_symmetric(s, what);
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error(std::string(what) +
                             ": eigendecomposition did not converge");
  }
  if (es.eigenvalues().minCoeff() <= 1e-14) {
    throw std::domain_error(std::string(what) +
                            ": matrix is not positive definite "
                            "(smallest eigenvalue <= 1e-14)");
  }
  return es;
}

}  // namespace

SpectralDecomposition svd(const Matrix& a) {
  if (a.size() == 0) {
    throw std::invalid_argument("svd: empty matrix");
  }
  if (!a.allFinite()) {
    throw std::invalid_argument("svd: matrix has non-finite entries");
  }
  Eigen::BDCSVD<Matrix> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("svd: decomposition did not converge");
  }
  SpectralDecomposition d;
  d.singular_values = solver.singularValues();
  d.left_vectors = solver.matrixU();
  d.right_vectors = solver.matrixV();
  return d;
}

Matrix gram_function(const SpectralDecomposition& d,
                     const std::function<double(double)>& f) {
  const auto m = d.right_vectors.cols();
  Vector values(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double s = j < d.singular_values.size() ? d.singular_values[j] : 0.0;
    const double v = f(s * s);
    if (!std::isfinite(v)) {
      throw std::domain_error("gram_function: function is not finite at " +
                              std::to_string(s * s));
    }
    values[j] = v;
  }
  Matrix r = d.right_vectors * values.asDiagonal() * d.right_vectors.transpose();
  return 0.5 * (r + r.transpose());
}

Matrix spd_root(const Matrix& s) {
  const auto es = spd_eigen(s, "spd_root");
  return es.eigenvectors() *
         es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

Matrix spd_root_inverse(const Matrix& s) {
  const auto es = spd_eigen(s, "spd_root_inverse");
  return es.eigenvectors() *
         es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

bool is_identity(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  return m == Matrix::Identity(m.rows(), m.cols());
}

}  // namespace dareg::linalg
