#pragma once

#include <string>

#include "dareg/linalg.hpp"

namespace dareg::problems {

/// Composite-midpoint grid on [0,1]: x_i = (i - 1/2)/n.
struct Grid {
  int n = 0;
  Vector points;

  static Grid midpoints(int n);
};

/// A discretized steady linear inverse problem y = A u + noise.
/// All norms and inner products on the discretized spaces are the plain
/// Euclidean ones on vector entries; no quadrature weights are applied to
/// noise, errors or RMSE values anywhere in this library.
struct ProblemInstance {
  Matrix A;
  Matrix Sigma;
  Vector u_true;
  Vector m0;
  Grid grid;
  std::string label;

  int dim() const { return static_cast<int>(A.cols()); }
};

enum class ExampleId { Rough, Intermediate, Smooth };

ExampleId example_from_name(const std::string& name);
std::string example_name(ExampleId id);

/// Index function families used in source conditions.
struct IndexFunction {
  enum class Kind { Hoelder, Logarithmic };
  Kind kind = Kind::Hoelder;
  double exponent = 1.0;  // nu for Hoelder, q for Logarithmic

  static IndexFunction hoelder(double nu);
  static IndexFunction logarithmic(double q);

  /// phi(lambda). Domain: lambda in (0, 1] for the logarithmic family,
  /// lambda > 0 otherwise.
  double operator()(double lambda) const;
};

/// Synthetic decay models for the eigenvalues of B^T B.
struct SpectrumModel {
  enum class Kind { Polynomial, Exponential };
  Kind kind = Kind::Polynomial;
  double rate = 1.0;  // theta for Polynomial (j^{-2 theta}), c for Exponential (e^{-2cj})
  int count = 0;

  static SpectrumModel polynomial(double theta, int n);
  static SpectrumModel exponential(double c, int n);

  /// Eigenvalues of B^T B, positive and strictly decreasing.
  Vector eigenvalues() const;
};

/// Midpoint-rule discretization of the integral operator with kernel
/// k(x,y) = min{x(1-y), y(1-x)}: A[i][j] = k(x_i, x_j)/n.
Matrix midpoint_operator(int n);

/// Closed-form exact solutions and exact data of the three benchmark
/// problems, evaluated pointwise on the grid.
Vector example_solution(ExampleId id, const Grid& grid);
Vector example_datum(ExampleId id, const Grid& grid);

/// Assembles the benchmark problem: midpoint operator, Sigma = I, m0 = 0.
ProblemInstance make_example(ExampleId id, int n);

/// Pre-whitened problem: K = Sigma^{-1/2} A, prior covariance factor
/// Omega = (K^T K)^p and B = K Omega^{1/2}, so that B^T B = (K^T K)^{p+1}.
struct WhitenedProblem {
  ProblemInstance base;
  double prior_power = 0.0;
  double rescale = 1.0;  // factor applied to A when ||K|| > 1
  bool sigma_is_identity = true;
  Matrix K;
  linalg::SpectralDecomposition k_svd;  // K = U diag(s) V^T
  Matrix omega;
  linalg::SpectralDecomposition b_svd;  // B = U diag(s^{p+1}) V^T

  int dim() const { return base.dim(); }
  /// Eigenvalues of B^T B (non-increasing).
  Vector b_eigenvalues() const;
  /// Eigenvalues of Omega, aligned with b_eigenvalues.
  Vector omega_eigenvalues() const;
  double omega_trace() const;
  Matrix b_operator() const;
  Matrix initial_covariance(double alpha) const;  // alpha^{-1} Omega
  Vector source() const { return base.u_true - base.m0; }
  /// Coordinates of u_true - m0 in the right singular basis of K.
  Vector source_coords() const;
};

WhitenedProblem whiten(ProblemInstance prob, double p);

/// Diagonal synthetic instance: the eigenvalues of B^T B follow the decay
/// model exactly, K = (B^T B)^{1/(2(p+1))}, Sigma = I, and the source
/// condition holds with equality: u_true - m0 = phi(K^T K) v with
/// v = n^{-1/2} (1,...,1), so ||v|| = 1.
WhitenedProblem diagonal_problem(const SpectrumModel& model, double p,
                                 const IndexFunction& source, int n);

}  // namespace dareg::problems
