#pragma once

#include <span>
#include <string>
#include <utility>

#include "dareg/filters.hpp"
#include "dareg/problems.hpp"

namespace dareg::analysis {

/// Spectral regularization families available as reference estimators.
enum class FilterKind { Tikhonov, Showalter };

/// Exact bias-variance decomposition of the mean squared error.
struct MseBreakdown {
  double bias_sq = 0.0;
  double variance = 0.0;
  double total = 0.0;  // always bias_sq + variance
  filters::Method method = filters::Method::NonStationaryArm;
  double alpha = 0.0;
  double t = 0.0;
};

/// Closed-form upper bound on the mean squared error, with the regime and
/// constants that produced it.
struct BoundReport {
  double bias_bound = 0.0;
  double variance_bound = 0.0;
  double bound_value = 0.0;  // bias_bound + variance_bound
  std::string regime;
  double constant = 1.0;      // multiplicative constant of the bias part
  double qualification = 0.0; // qualification index used
};

/// Result of solving an a-priori parameter-choice equation.
struct AlphaChoice {
  double eps_star = 0.0;
  double alpha_star = 0.0;
};

/// Tikhonov-type reference estimator on the whitened, time-averaged datum
/// ybar = Sigma^{-1/2} z(T)/T:
///   m0 + (eps + B^T B)^{-1} Omega^{1/2} K^T (ybar - K m0).
/// For p = 0 its expectation over the noise equals the expected mean of the
/// covariance-updating filter at eps = alpha/T.
Vector tikhonov_reference(const problems::WhitenedProblem& wp,
                          const Vector& ybar, double eps, const Vector& m0);

/// Showalter-type reference with the exponential filter
/// q_eps(lambda) = (1 - e^{-lambda/eps})/lambda in place of the resolvent.
Vector showalter_reference(const problems::WhitenedProblem& wp,
                           const Vector& ybar, double eps, const Vector& m0);

/// Maximizes r_eps(lambda) lambda^nu over a logarithmic grid on (1e-14, 1]
/// and returns {sup, bound} where the bound is eps^nu for Tikhonov
/// (0 <= nu <= 1) and max{nu^nu, 1} eps^nu for Showalter. Throws if the
/// grid maximum ever exceeds the bound.
std::pair<double, double> residual_sup_check(FilterKind kind, double eps,
                                             double nu);

/// Effective dimension N(eps) = sum_j lambda_j / (eps + lambda_j).
double effective_dimension(const Vector& eigs, double eps);
double effective_dimension(const problems::WhitenedProblem& wp, double eps);

/// Exact spectral evaluation of bias^2 and variance for the two
/// time-continuous methods, for a given source vector u_true - m0.
MseBreakdown mse_exact(const problems::WhitenedProblem& wp,
                       filters::Method method, double alpha, double t,
                       const Vector& source);
MseBreakdown mse_exact(const problems::WhitenedProblem& wp,
                       filters::Method method, double alpha, double t);

/// Theorem-style bound under a Hoelder source condition phi(lambda) =
/// lambda^nu (nu measured against K^T K). Logarithmic index functions are
/// rejected: they do not satisfy the monotonicity premises on (0, 1].
BoundReport mse_bound(const problems::WhitenedProblem& wp,
                      filters::Method method,
                      const problems::IndexFunction& phi, double alpha,
                      double t);

/// Solves Theta_phi(eps) = sqrt(1/T) with
/// Theta_phi(eps) = eps phi(eps) / sqrt(eps N(eps^{p+1})) by bisection and
/// returns eps* together with alpha* = T (eps*)^{p+1}.
AlphaChoice solve_alpha_theta(const Vector& b_eigs, double p,
                              const problems::IndexFunction& phi, double T);
AlphaChoice solve_alpha_theta(const problems::WhitenedProblem& wp,
                              const problems::IndexFunction& phi, double T);

/// Same for Psi_phi(eps) = eps^{(p+1)/2} phi(eps).
AlphaChoice solve_alpha_psi(const Vector& b_eigs, double p,
                            const problems::IndexFunction& phi, double T);
AlphaChoice solve_alpha_psi(const problems::WhitenedProblem& wp,
                            const problems::IndexFunction& phi, double T);

/// Least-squares slope of log y against log x.
double fit_slope(std::span<const std::pair<double, double>> points);

}  // namespace dareg::analysis
