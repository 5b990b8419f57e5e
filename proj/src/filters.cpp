#include "dareg/filters.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <sstream>

namespace dareg::filters {

namespace {

using problems::WhitenedProblem;

void check_stream(const WhitenedProblem& wp, const datagen::DataStream& stream) {
  if (stream.steps() == 0) {
    throw std::invalid_argument("filter run: empty data stream");
  }
  if (stream.dim() != wp.base.A.rows()) {
    throw std::invalid_argument("filter run: stream dimension does not match the problem");
  }
}

Matrix symmetrize(Matrix c) {
  c = 0.5 * (c + c.transpose()).eval();
  return c;
}

// Spectral coordinates shared by the fast paths: state in the right
// singular basis V, data in the left singular basis U.
struct SpectralLoop {
  const Matrix& u;
  const Matrix& v;
  Vector s;       // singular values of K
  Vector coeff;   // current state coordinates
  Vector w;       // projected increment, reused

  SpectralLoop(const WhitenedProblem& wp)
      : u(wp.k_svd.left_vectors),
        v(wp.k_svd.right_vectors),
        s(wp.k_svd.singular_values),
        coeff(v.transpose() * wp.base.m0),
        w(s.size()) {}

  void project(const Vector& increment) { w.noalias() = u.transpose() * increment; }
  Vector mean() const { return v * coeff; }
};

FilterRun run_common(const WhitenedProblem& wp, const datagen::DataStream& stream,
                     double alpha, Method method) {
  if (alpha <= 0) throw std::invalid_argument("filter run: alpha must be > 0");
  check_stream(wp, stream);
  const double h_max = max_stable_step(wp, alpha);
  if (!(stream.h < h_max)) throw StabilityError(stream.h, h_max);
  FilterRun run;
  run.method = method;
  run.alpha = alpha;
  run.prior_power = wp.prior_power;
  run.h = stream.h;
  run.times.reserve(stream.steps() + 1);
  run.means.reserve(stream.steps() + 1);
  return run;
}

}  // namespace

StabilityError::StabilityError(double h, double h_max)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "explicit Euler step h = " << h
           << " violates the stability bound; the maximal admissible step is "
           << h_max;
        return os.str();
      }()),
      h_max_(h_max) {}

double max_stable_step(const problems::WhitenedProblem& wp, double alpha) {
  if (alpha <= 0) throw std::invalid_argument("max_stable_step: alpha must be > 0");
  // C_0 A^T Sigma^{-1} A = alpha^{-1} (K^T K)^{p+1}; its norm is the top
  // eigenvalue of B^T B over alpha.
  const double top = wp.b_svd.spectral_norm();
  const double norm = top * top / alpha;
  return norm > 0 ? 1.0 / norm : std::numeric_limits<double>::infinity();
}

FilterState FilterRun::state_at(std::size_t i) const {
  FilterState st;
  st.mean = means.at(i);
  st.t = times.at(i);
  if (!covariances.empty()) {
    st.covariance = covariances.at(i);
  } else if (i + 1 == means.size() && final_covariance) {
    st.covariance = final_covariance;
  }
  return st;
}

FilterRun nonstationary_run(const problems::WhitenedProblem& wp,
                            const datagen::DataStream& stream, double alpha,
                            const RunOptions& opts) {
  FilterRun run = run_common(wp, stream, alpha, Method::NonStationaryArm);
  const double h = stream.h;
  const int n = wp.dim();

  if (wp.sigma_is_identity && !opts.force_dense) {
    SpectralLoop loop(wp);
    Vector gamma =
        wp.k_svd.singular_values.array().pow(2.0 * wp.prior_power) / alpha;
    const Vector& s = loop.s;
    auto covariance = [&] {
      return Matrix(symmetrize(loop.v * gamma.asDiagonal() * loop.v.transpose()));
    };
    run.times.push_back(0.0);
    run.means.push_back(wp.base.m0);
    if (opts.trace_covariance) run.covariances.push_back(covariance());
    for (int k = 0; k < stream.steps(); ++k) {
      loop.project(stream.increments[k]);
      for (int j = 0; j < n; ++j) {
        loop.coeff[j] += gamma[j] * s[j] * (loop.w[j] - h * s[j] * loop.coeff[j]);
        const double g = gamma[j] * s[j];
        gamma[j] -= h * g * g;
      }
      run.times.push_back((k + 1) * h);
      run.means.push_back(loop.mean());
      if (opts.trace_covariance) run.covariances.push_back(covariance());
    }
    run.final_covariance = opts.trace_covariance ? run.covariances.back()
                                                 : covariance();
    return run;
  }

  // Dense path for general noise covariances.
  const Eigen::LLT<Matrix> sigma_llt(wp.base.Sigma);
  if (sigma_llt.info() != Eigen::Success) {
    throw std::runtime_error("nonstationary_run: Sigma is not positive definite");
  }
  const Matrix gram = wp.base.A.transpose() *
                      sigma_llt.solve(Matrix(wp.base.A));  // A^T Sigma^{-1} A
  Matrix c = wp.initial_covariance(alpha);
  Vector m = wp.base.m0;
  run.times.push_back(0.0);
  run.means.push_back(m);
  if (opts.trace_covariance) run.covariances.push_back(c);
  for (int k = 0; k < stream.steps(); ++k) {
    const Vector residual = stream.increments[k] - h * (wp.base.A * m);
    m += c * (wp.base.A.transpose() * sigma_llt.solve(residual));
    c = symmetrize(c - h * c * gram * c);
    run.times.push_back((k + 1) * h);
    run.means.push_back(m);
    if (opts.trace_covariance) run.covariances.push_back(c);
  }
  run.final_covariance = std::move(c);
  return run;
}

FilterRun stationary_run(const problems::WhitenedProblem& wp,
                         const datagen::DataStream& stream, double alpha,
                         const RunOptions& opts) {
  FilterRun run = run_common(wp, stream, alpha, Method::StationaryArm);
  const double h = stream.h;
  const int n = wp.dim();

  if (wp.sigma_is_identity && !opts.force_dense) {
    SpectralLoop loop(wp);
    const Vector gamma =
        wp.k_svd.singular_values.array().pow(2.0 * wp.prior_power) / alpha;
    const Vector& s = loop.s;
    run.times.push_back(0.0);
    run.means.push_back(wp.base.m0);
    for (int k = 0; k < stream.steps(); ++k) {
      loop.project(stream.increments[k]);
      for (int j = 0; j < n; ++j) {
        loop.coeff[j] += gamma[j] * s[j] * (loop.w[j] - h * s[j] * loop.coeff[j]);
      }
      run.times.push_back((k + 1) * h);
      run.means.push_back(loop.mean());
    }
    return run;
  }

  const Eigen::LLT<Matrix> sigma_llt(wp.base.Sigma);
  if (sigma_llt.info() != Eigen::Success) {
    throw std::runtime_error("stationary_run: Sigma is not positive definite");
  }
  // Fixed gain C_0 A^T Sigma^{-1}, computed once.
  const Matrix gain = wp.initial_covariance(alpha) * wp.base.A.transpose() *
                      sigma_llt.solve(Matrix::Identity(stream.dim(), stream.dim()));
  Vector m = wp.base.m0;
  run.times.push_back(0.0);
  run.means.push_back(m);
  for (int k = 0; k < stream.steps(); ++k) {
    m += gain * (stream.increments[k] - h * (wp.base.A * m));
    run.times.push_back((k + 1) * h);
    run.means.push_back(m);
  }
  return run;
}

Matrix closed_form_covariance(const problems::WhitenedProblem& wp,
                              double alpha, double t) {
  if (alpha <= 0) throw std::invalid_argument("closed_form_covariance: alpha must be > 0");
  if (t < 0) throw std::invalid_argument("closed_form_covariance: t must be >= 0");
  const double p = wp.prior_power;
  // (alpha Omega^{-1} + t K^T K)^{-1} = V diag(x^p / (alpha + t x^{p+1})) V^T
  // with x the eigenvalues of K^T K; null modes stay at zero for p > 0.
  return linalg::gram_function(wp.k_svd, [&](double x) {
    return std::pow(x, p) / (alpha + t * std::pow(x, p + 1.0));
  });
}

namespace {

Vector expected_mean(const problems::WhitenedProblem& wp, double alpha,
                     double t, bool stationary) {
  if (alpha <= 0) throw std::invalid_argument("expected_mean: alpha must be > 0");
  if (t < 0) throw std::invalid_argument("expected_mean: t must be >= 0");
  if (t == 0) return wp.base.m0;
  const Vector lambda = wp.b_eigenvalues();
  Vector coords = wp.source_coords();
  for (Eigen::Index j = 0; j < coords.size(); ++j) {
    const double factor = stationary
                              ? std::exp(-t * lambda[j] / alpha)
                              : (alpha / t) / (alpha / t + lambda[j]);
    coords[j] *= factor;
  }
  return wp.base.u_true - wp.k_svd.right_vectors * coords;
}

}  // namespace

Vector expected_mean_nonstationary(const problems::WhitenedProblem& wp,
                                   double alpha, double t) {
  return expected_mean(wp, alpha, t, false);
}

Vector expected_mean_stationary(const problems::WhitenedProblem& wp,
                                double alpha, double t) {
  return expected_mean(wp, alpha, t, true);
}

Vector closed_form_mean(const problems::WhitenedProblem& wp,
                        const datagen::DataStream& stream, double alpha) {
  check_stream(wp, stream);
  const double T = stream.T;
  Vector z = Vector::Zero(stream.dim());
  for (const auto& inc : stream.increments) z += inc;
  const Vector innovation = z - T * (wp.base.A * wp.base.u_true);
  // (C_0^{-1} + T A^T Sigma^{-1} A)^{-1} A^T Sigma^{-1} applied spectrally:
  // with whitened data coordinates this is V diag(x^p s / (alpha + T x^{p+1})) U^T.
  const Vector white = wp.sigma_is_identity
                           ? innovation
                           : Vector(linalg::spd_root_inverse(wp.base.Sigma) *
                                    innovation);
  Vector coords = wp.k_svd.left_vectors.transpose() * white;
  const double p = wp.prior_power;
  const Vector& s = wp.k_svd.singular_values;
  for (Eigen::Index j = 0; j < coords.size(); ++j) {
    const double x = s[j] * s[j];
    coords[j] *= std::pow(x, p) * s[j] / (alpha + T * std::pow(x, p + 1.0));
  }
  return expected_mean_nonstationary(wp, alpha, T) +
         wp.k_svd.right_vectors * coords;
}

FilterState discrete_kalman_step(const FilterState& state, const Vector& y,
                                 const Matrix& A, const Matrix& Sigma) {
  if (!state.covariance) {
    throw std::invalid_argument("discrete_kalman_step: state has no covariance");
  }
  const Matrix& c = *state.covariance;
  const Matrix innovation_cov = A * c * A.transpose() + Sigma;
  const Eigen::LLT<Matrix> llt(innovation_cov);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("discrete_kalman_step: A C A^T + Sigma is singular");
  }
  const Matrix gain = llt.solve(A * c).transpose();  // C A^T (A C A^T + Sigma)^{-1}
  FilterState next;
  next.mean = state.mean + gain * (y - A * state.mean);
  next.covariance = symmetrize(c - gain * (A * c));
  next.t = state.t + 1.0;
  return next;
}

Matrix discrete_3dvar_gain(const Matrix& C0, const Matrix& A,
                           const Matrix& Sigma) {
  const Matrix innovation_cov = A * C0 * A.transpose() + Sigma;
  const Eigen::LLT<Matrix> llt(innovation_cov);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("discrete_3dvar_gain: A C0 A^T + Sigma is singular");
  }
  return llt.solve(A * C0).transpose();
}

FilterState discrete_3dvar_step(const FilterState& state, const Vector& y,
                                const Matrix& A, const Matrix& gain) {
  FilterState next;
  next.mean = state.mean + gain * (y - A * state.mean);
  next.covariance = state.covariance;
  next.t = state.t + 1.0;
  return next;
}

FilterState discrete_3dvar_step(const FilterState& state, const Vector& y,
                                const Matrix& A, const Matrix& Sigma,
                                const Matrix& C0) {
  return discrete_3dvar_step(state, y, A, discrete_3dvar_gain(C0, A, Sigma));
}

}  // namespace dareg::filters
