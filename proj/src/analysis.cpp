#include "dareg/analysis.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dareg::analysis {

namespace {

using problems::IndexFunction;
using problems::WhitenedProblem;

double kahan_sum(const Vector& terms) {
  double sum = 0.0, carry = 0.0;
  for (Eigen::Index i = 0; i < terms.size(); ++i) {
    const double y = terms[i] - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

// (1 - e^{-lambda/eps}) / lambda, continued by 1/eps at lambda = 0.
double showalter_filter(double lambda, double eps) {
  if (lambda == 0.0) return 1.0 / eps;
  return -std::expm1(-lambda / eps) / lambda;
}

Vector reference_estimate(const WhitenedProblem& wp, const Vector& ybar,
                          double eps, const Vector& m0, FilterKind kind) {
  if (eps <= 0) throw std::invalid_argument("reference estimator: eps must be > 0");
  if (ybar.size() != wp.K.rows() || m0.size() != wp.K.cols()) {
    throw std::invalid_argument("reference estimator: dimension mismatch");
  }
  const double p = wp.prior_power;
  const Vector& s = wp.k_svd.singular_values;
  Vector coords = wp.k_svd.left_vectors.transpose() * (ybar - wp.K * m0);
  for (Eigen::Index j = 0; j < coords.size(); ++j) {
    const double lambda = std::pow(s[j], 2.0 * (p + 1.0));  // eigenvalue of B^T B
    const double q = kind == FilterKind::Tikhonov
                         ? 1.0 / (eps + lambda)
                         : showalter_filter(lambda, eps);
    coords[j] *= q * std::pow(s[j], p + 1.0);  // q(B^T B) Omega^{1/2} K^T
  }
  return m0 + wp.k_svd.right_vectors * coords;
}

}  // namespace

Vector tikhonov_reference(const WhitenedProblem& wp, const Vector& ybar,
                          double eps, const Vector& m0) {
  return reference_estimate(wp, ybar, eps, m0, FilterKind::Tikhonov);
}

Vector showalter_reference(const WhitenedProblem& wp, const Vector& ybar,
                           double eps, const Vector& m0) {
  return reference_estimate(wp, ybar, eps, m0, FilterKind::Showalter);
}

std::pair<double, double> residual_sup_check(FilterKind kind, double eps,
                                             double nu) {
  if (eps <= 0) throw std::invalid_argument("residual_sup_check: eps must be > 0");
  if (nu < 0) throw std::invalid_argument("residual_sup_check: nu must be >= 0");
  if (kind == FilterKind::Tikhonov && nu > 1.0) {
    throw std::invalid_argument(
        "residual_sup_check: the resolvent filter has qualification 1");
  }
  constexpr int kGridSize = 10000;
  const double lo = std::log(1e-14), hi = std::log(1.0);
  double sup = 0.0;
  for (int i = 0; i < kGridSize; ++i) {
    const double lambda = std::exp(lo + (hi - lo) * i / (kGridSize - 1));
    const double r = kind == FilterKind::Tikhonov ? eps / (eps + lambda)
                                                  : std::exp(-lambda / eps);
    sup = std::max(sup, r * std::pow(lambda, nu));
  }
  const double bound = kind == FilterKind::Tikhonov
                           ? std::pow(eps, nu)
                           : std::max(std::pow(nu, nu), 1.0) * std::pow(eps, nu);
  if (sup > bound) {
    throw std::runtime_error("residual_sup_check: grid maximum exceeds the bound");
  }
  return {sup, bound};
}

double effective_dimension(const Vector& eigs, double eps) {
  if (eps <= 0) throw std::invalid_argument("effective_dimension: eps must be > 0");
  Vector terms(eigs.size());
  for (Eigen::Index j = 0; j < eigs.size(); ++j) {
    if (eigs[j] < 0) {
      throw std::invalid_argument("effective_dimension: eigenvalues must be >= 0");
    }
    terms[j] = eigs[j] / (eps + eigs[j]);
  }
  return kahan_sum(terms);
}

double effective_dimension(const WhitenedProblem& wp, double eps) {
  return effective_dimension(wp.b_eigenvalues(), eps);
}

MseBreakdown mse_exact(const WhitenedProblem& wp, filters::Method method,
                       double alpha, double t, const Vector& source) {
  if (alpha <= 0 || t <= 0) {
    throw std::invalid_argument("mse_exact: alpha and t must be > 0");
  }
  if (method != filters::Method::NonStationaryArm &&
      method != filters::Method::StationaryArm) {
    throw std::invalid_argument("mse_exact: closed forms exist for the two "
                                "time-continuous methods only");
  }
  const bool stationary = method == filters::Method::StationaryArm;
  const Vector lambda = wp.b_eigenvalues();
  const Vector omega = wp.omega_eigenvalues();
  const Vector coords = wp.k_svd.right_vectors.transpose() * source;
  const double eps = alpha / t;

  Vector bias_terms(lambda.size());
  Vector var_terms(lambda.size());
  for (Eigen::Index j = 0; j < lambda.size(); ++j) {
    if (stationary) {
      const double decay = std::exp(-2.0 * t * lambda[j] / alpha);
      bias_terms[j] = decay * coords[j] * coords[j];
      var_terms[j] = omega[j] * (-std::expm1(-2.0 * t * lambda[j] / alpha)) /
                     (2.0 * alpha);
    } else {
      const double r = eps / (eps + lambda[j]);
      bias_terms[j] = r * r * coords[j] * coords[j];
      const double denom = eps + lambda[j];
      var_terms[j] = omega[j] * lambda[j] / (denom * denom) / t;
    }
  }
  MseBreakdown mse;
  mse.bias_sq = kahan_sum(bias_terms);
  mse.variance = kahan_sum(var_terms);
  mse.total = mse.bias_sq + mse.variance;
  mse.method = method;
  mse.alpha = alpha;
  mse.t = t;
  return mse;
}

MseBreakdown mse_exact(const WhitenedProblem& wp, filters::Method method,
                       double alpha, double t) {
  return mse_exact(wp, method, alpha, t, wp.source());
}

BoundReport mse_bound(const WhitenedProblem& wp, filters::Method method,
                      const IndexFunction& phi, double alpha, double t) {
  if (alpha <= 0 || t <= 0) {
    throw std::invalid_argument("mse_bound: alpha and t must be > 0");
  }
  if (phi.kind != IndexFunction::Kind::Hoelder) {
    throw std::invalid_argument(
        "mse_bound: logarithmic index functions do not satisfy the "
        "monotonicity premises of the closed-form bounds on (0, 1]; "
        "only the Hoelder family is admissible here");
  }
  const double p = wp.prior_power;
  const double nu = phi.exponent;
  const double eps = alpha / t;
  const double eps_k = std::pow(eps, 1.0 / (p + 1.0));  // on the K^T K scale

  BoundReport report;
  if (method == filters::Method::NonStationaryArm) {
    if (nu <= p + 1.0) {
      // phi(lambda)/lambda^{p+1} non-increasing.
      report.regime = "holder";
      report.constant = 1.0;
      report.bias_bound = std::pow(phi(eps_k), 2.0);
    } else {
      // phi(lambda) <= lambda^{p+1} near zero: rate saturation.
      report.regime = "saturation";
      report.constant = 1.0;
      report.bias_bound = eps * eps;
    }
    report.qualification = p + 1.0;
    report.variance_bound = std::pow(alpha, -1.0 / (p + 1.0)) *
                            std::pow(t, -p / (p + 1.0)) *
                            effective_dimension(wp, eps);
  } else if (method == filters::Method::StationaryArm) {
    report.regime = "stationary";
    report.qualification = nu;
    const double mu = nu / (p + 1.0);
    report.constant = std::max(std::pow(mu, mu), 1.0);
    report.bias_bound = report.constant * std::pow(phi(eps_k), 2.0);
    report.variance_bound = wp.omega_trace() / (2.0 * alpha);
  } else {
    throw std::invalid_argument("mse_bound: closed-form bounds exist for the "
                                "two time-continuous methods only");
  }
  report.bound_value = report.bias_bound + report.variance_bound;
  return report;
}

namespace {

// Bisection in log-space for a non-decreasing positive function.
double bisect_increasing(const std::function<double(double)>& f, double lo,
                         double hi, double target, const char* what) {
  double flo = f(lo), fhi = f(hi);
  if (!(flo <= target && target <= fhi)) {
    std::ostringstream os;
    os << what << ": no sign change in the bracket [" << lo << ", " << hi
       << "]; values at the endpoints are " << flo << " and " << fhi
       << " for target " << target;
    throw std::runtime_error(os.str());
  }
  double llo = std::log(lo), lhi = std::log(hi);
  double mid = lo;
  for (int iter = 0; iter < 200; ++iter) {
    mid = std::exp(0.5 * (llo + lhi));
    const double fm = f(mid);
    if (std::abs(fm - target) <= 1e-10 * target) return mid;
    (fm < target ? llo : lhi) = std::log(mid);
  }
  if (std::abs(f(mid) - target) > 1e-10 * target) {
    throw std::runtime_error(std::string(what) +
                             ": bisection did not reach the residual tolerance");
  }
  return mid;
}

AlphaChoice solve_choice(const Vector& b_eigs, double p,
                         const IndexFunction& phi, double T, bool theta_rule) {
  if (T <= 0) throw std::invalid_argument("parameter choice: T must be > 0");
  if (b_eigs.size() == 0) {
    throw std::invalid_argument("parameter choice: empty spectrum");
  }
  const double top = b_eigs.maxCoeff();
  const auto value = [&](double eps) {
    if (theta_rule) {
      const double n_eff = effective_dimension(b_eigs, std::pow(eps, p + 1.0));
      return std::sqrt(eps) * phi(eps) / std::sqrt(n_eff);
    }
    return std::pow(eps, (p + 1.0) / 2.0) * phi(eps);
  };
  const double hi = std::pow(top, 1.0 / (p + 1.0));
  const double eps_star = bisect_increasing(value, 1e-14, hi,
                                            1.0 / std::sqrt(T),
                                            theta_rule ? "solve_alpha_theta"
                                                       : "solve_alpha_psi");
  return {eps_star, T * std::pow(eps_star, p + 1.0)};
}

}  // namespace

AlphaChoice solve_alpha_theta(const Vector& b_eigs, double p,
                              const IndexFunction& phi, double T) {
  return solve_choice(b_eigs, p, phi, T, true);
}

AlphaChoice solve_alpha_theta(const WhitenedProblem& wp,
                              const IndexFunction& phi, double T) {
  return solve_choice(wp.b_eigenvalues(), wp.prior_power, phi, T, true);
}

AlphaChoice solve_alpha_psi(const Vector& b_eigs, double p,
                            const IndexFunction& phi, double T) {
  return solve_choice(b_eigs, p, phi, T, false);
}

AlphaChoice solve_alpha_psi(const WhitenedProblem& wp,
                            const IndexFunction& phi, double T) {
  return solve_choice(wp.b_eigenvalues(), wp.prior_power, phi, T, false);
}

double fit_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) {
    throw std::invalid_argument("fit_slope: need at least 3 points");
  }
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0) || !(y > 0)) {
      throw std::domain_error("fit_slope: points must be positive");
    }
    mx += std::log(x);
    my += std::log(y);
  }
  mx /= points.size();
  my /= points.size();
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mx;
    sxy += dx * (std::log(y) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace dareg::analysis
