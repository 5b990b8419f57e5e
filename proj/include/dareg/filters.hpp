#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "dareg/datagen.hpp"
#include "dareg/problems.hpp"

namespace dareg::filters {

enum class Method { NonStationaryArm, StationaryArm, DiscreteKalman, Discrete3dvar };

/// Snapshot of an assimilation recursion: posterior mean, optional
/// posterior covariance (absent for fixed-gain methods), current time.
struct FilterState {
  Vector mean;
  std::optional<Matrix> covariance;
  double t = 0.0;
};

/// Trajectory of a filter at t = 0, h, 2h, ... For the non-stationary
/// method the final covariance is always kept; the full covariance
/// trajectory is stored only when tracing is requested.
struct FilterRun {
  Method method = Method::NonStationaryArm;
  double alpha = 1.0;
  double prior_power = 0.0;
  double h = 0.0;
  std::vector<double> times;
  std::vector<Vector> means;
  std::optional<Matrix> final_covariance;
  std::vector<Matrix> covariances;  // non-empty only when traced

  const Vector& final_mean() const { return means.back(); }
  double final_time() const { return times.back(); }
  FilterState state_at(std::size_t i) const;
};

struct RunOptions {
  bool trace_covariance = false;
  /// Forces the dense recursion even when the spectral fast path applies.
  bool force_dense = false;
};

/// Raised when the explicit Euler step violates h ||C_0 A^T Sigma^{-1} A|| < 1.
class StabilityError : public std::runtime_error {
 public:
  StabilityError(double h, double h_max);
  double max_step() const { return h_max_; }

 private:
  double h_max_;
};

/// Largest admissible Euler step 1 / ||C_0 A^T Sigma^{-1} A|| for the
/// initial covariance C_0 = alpha^{-1} Omega.
double max_stable_step(const problems::WhitenedProblem& wp, double alpha);

/// Explicit Euler discretization of the covariance-updating recursion
///   m_n = m_{n-1} + C_{n-1} A^T Sigma^{-1} (dz_n - h A m_{n-1}),
///   C_n = C_{n-1} - h C_{n-1} A^T Sigma^{-1} A C_{n-1},
/// started at (m0, alpha^{-1} Omega). When Sigma = I the recursion runs
/// coordinatewise in the SVD basis of A.
FilterRun nonstationary_run(const problems::WhitenedProblem& wp,
                            const datagen::DataStream& stream, double alpha,
                            const RunOptions& opts = {});

/// Fixed-gain variant: C is frozen at C_0, the covariance field stays empty.
FilterRun stationary_run(const problems::WhitenedProblem& wp,
                         const datagen::DataStream& stream, double alpha,
                         const RunOptions& opts = {});

/// C(t) = (C_0^{-1} + t A^T Sigma^{-1} A)^{-1}, evaluated spectrally.
Matrix closed_form_covariance(const problems::WhitenedProblem& wp,
                              double alpha, double t);

/// E m(t) = u_true - (C_0^{-1} + t A^T Sigma^{-1} A)^{-1} C_0^{-1} (u_true - m0).
Vector expected_mean_nonstationary(const problems::WhitenedProblem& wp,
                                   double alpha, double t);

/// E zeta(t) = u_true - exp(-(t/alpha) B^T B) (u_true - m0).
Vector expected_mean_stationary(const problems::WhitenedProblem& wp,
                                double alpha, double t);

/// Exact mean of the covariance-updating filter given the realized path,
/// which enters only through z(T) = sum of increments:
///   m(T) = E m(T) + (C_0^{-1} + T A^T Sigma^{-1} A)^{-1} A^T Sigma^{-1} (z(T) - T A u_true).
Vector closed_form_mean(const problems::WhitenedProblem& wp,
                        const datagen::DataStream& stream, double alpha);

/// One update of the discrete-time Kalman recursion
///   K = C A^T (A C A^T + Sigma)^{-1},
///   m <- m + K (y - A m),  C <- (I - K A) C.
/// The state's time advances by one unit step.
FilterState discrete_kalman_step(const FilterState& state, const Vector& y,
                                 const Matrix& A, const Matrix& Sigma);

/// Fixed gain of the discrete fixed-covariance recursion.
Matrix discrete_3dvar_gain(const Matrix& C0, const Matrix& A,
                           const Matrix& Sigma);

FilterState discrete_3dvar_step(const FilterState& state, const Vector& y,
                                const Matrix& A, const Matrix& gain);

FilterState discrete_3dvar_step(const FilterState& state, const Vector& y,
                                const Matrix& A, const Matrix& Sigma,
                                const Matrix& C0);

}  // namespace dareg::filters
