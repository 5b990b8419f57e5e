#pragma once

#include <Eigen/Dense>
#include <functional>

namespace dareg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

/// Singular values below kSingularCutoff * s_max are treated as exactly
/// zero in inverse-like spectral functions (pseudo-inverse convention).
inline constexpr double kSingularCutoff = 1e-14;

/// Full singular value decomposition A = U diag(s) V^T with s_1 >= s_2 >= ...
/// U and V always carry a complete orthonormal basis, including the
/// numerical null space.
struct SpectralDecomposition {
  Vector singular_values;
  Matrix left_vectors;   // U
  Matrix right_vectors;  // V

  double spectral_norm() const {
    return singular_values.size() > 0 ? singular_values[0] : 0.0;
  }
  Matrix reconstruct() const {
    return left_vectors * singular_values.asDiagonal() *
           right_vectors.transpose();
  }
};

SpectralDecomposition svd(const Matrix& a);

/// Spectral function of the Gram operator: V diag(f(s_j^2)) V^T.
/// Throws std::domain_error if f is non-finite at some s_j^2.
Matrix gram_function(const SpectralDecomposition& d,
                     const std::function<double(double)>& f);

/// Symmetric positive definite square root S^{1/2}.
Matrix spd_root(const Matrix& s);

/// Symmetric positive definite inverse square root S^{-1/2}.
/// Throws std::domain_error if the smallest eigenvalue is <= 1e-14.
Matrix spd_root_inverse(const Matrix& s);

bool is_identity(const Matrix& m);

}  // namespace linalg
}  // namespace dareg
