#include "dareg/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace dareg::problems {

namespace {

double hat(double x) { return x <= 0.5 ? x : 1.0 - x; }

// A applied to the hat function, in closed form.
double hat_image(double x) {
  if (x <= 0.5) return -x * (4.0 * x * x - 3.0) / 24.0;
  return (x - 1.0) * (4.0 * x * x - 8.0 * x + 1.0) / 24.0;
}

// A^2 applied to the hat function (times 1): datum of the intermediate case
// before the factor 10.
double hat_image2(double x) {
  if (x <= 0.5) {
    return x * (16.0 * std::pow(x, 4) - 40.0 * x * x + 25.0) / 1920.0;
  }
  return (-16.0 * std::pow(x, 5) + 80.0 * std::pow(x, 4) -
          120.0 * std::pow(x, 3) + 40.0 * x * x + 15.0 * x + 1.0) /
         1920.0;
}

// A^3 applied to the hat function.
double hat_image3(double x) {
  if (x <= 0.5) {
    return (427.0 * x - 700.0 * std::pow(x, 3) + 336.0 * std::pow(x, 5) -
            64.0 * std::pow(x, 7)) /
           322560.0;
  }
  return (-1.0 + 441.0 * x - 84.0 * x * x - 420.0 * std::pow(x, 3) -
          560.0 * std::pow(x, 4) + 1008.0 * std::pow(x, 5) -
          448.0 * std::pow(x, 6) + 64.0 * std::pow(x, 7)) /
         322560.0;
}

}  // namespace

Grid Grid::midpoints(int n) {
  if (n < 1) throw std::invalid_argument("Grid: n must be >= 1");
  Grid g;
  g.n = n;
  g.points.resize(n);
  for (int i = 0; i < n; ++i) g.points[i] = (i + 0.5) / n;
  return g;
}

ExampleId example_from_name(const std::string& name) {
  if (name == "rough") return ExampleId::Rough;
  if (name == "intermediate") return ExampleId::Intermediate;
  if (name == "smooth") return ExampleId::Smooth;
  throw std::invalid_argument("unknown example id: " + name);
}

std::string example_name(ExampleId id) {
  switch (id) {
    case ExampleId::Rough: return "rough";
    case ExampleId::Intermediate: return "intermediate";
    case ExampleId::Smooth: return "smooth";
  }
  throw std::logic_error("unreachable");
}

IndexFunction IndexFunction::hoelder(double nu) {
  if (nu <= 0) throw std::invalid_argument("IndexFunction: nu must be > 0");
  return {Kind::Hoelder, nu};
}

IndexFunction IndexFunction::logarithmic(double q) {
  if (q <= 0) throw std::invalid_argument("IndexFunction: q must be > 0");
  return {Kind::Logarithmic, q};
}

double IndexFunction::operator()(double lambda) const {
  if (lambda <= 0) {
    throw std::domain_error("index function: lambda must be > 0");
  }
  switch (kind) {
    case Kind::Hoelder:
      return std::pow(lambda, exponent);
    case Kind::Logarithmic:
      if (lambda > 1.0) {
        throw std::domain_error(
            "index function: logarithmic kind requires lambda <= 1");
      }
      // lambda == 1 gives +infinity by continuity of the formula.
      return std::pow(-std::log(lambda), -exponent);
  }
  throw std::logic_error("unreachable");
}

SpectrumModel SpectrumModel::polynomial(double theta, int n) {
  if (theta <= 0) throw std::invalid_argument("SpectrumModel: theta must be > 0");
  return {Kind::Polynomial, theta, n};
}

SpectrumModel SpectrumModel::exponential(double c, int n) {
  if (c <= 0) throw std::invalid_argument("SpectrumModel: c must be > 0");
  return {Kind::Exponential, c, n};
}

Vector SpectrumModel::eigenvalues() const {
  if (count < 1) throw std::invalid_argument("SpectrumModel: count must be >= 1");
  Vector eigs(count);
  for (int j = 1; j <= count; ++j) {
    eigs[j - 1] = kind == Kind::Polynomial ? std::pow(double(j), -2.0 * rate)
                                           : std::exp(-2.0 * rate * j);
  }
  return eigs;
}

Matrix midpoint_operator(int n) {
  if (n < 2) throw std::invalid_argument("midpoint_operator: n must be >= 2");
  const Grid g = Grid::midpoints(n);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) {
    const double x = g.points[i];
    for (int j = 0; j <= i; ++j) {
      const double y = g.points[j];
      const double k = std::min(x * (1.0 - y), y * (1.0 - x));
      a(i, j) = k / n;
      a(j, i) = a(i, j);
    }
  }
  return a;
}

Vector example_solution(ExampleId id, const Grid& grid) {
  Vector u(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    const double x = grid.points[i];
    switch (id) {
      case ExampleId::Rough: u[i] = hat(x); break;
      case ExampleId::Intermediate: u[i] = 10.0 * hat_image(x); break;
      case ExampleId::Smooth: u[i] = 100.0 * hat_image2(x); break;
    }
  }
  return u;
}

Vector example_datum(ExampleId id, const Grid& grid) {
  Vector y(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    const double x = grid.points[i];
    switch (id) {
      case ExampleId::Rough: y[i] = hat_image(x); break;
      case ExampleId::Intermediate: y[i] = 10.0 * hat_image2(x); break;
      case ExampleId::Smooth: y[i] = 100.0 * hat_image3(x); break;
    }
  }
  return y;
}

ProblemInstance make_example(ExampleId id, int n) {
  ProblemInstance prob;
  prob.grid = Grid::midpoints(n);
  prob.A = midpoint_operator(n);
  prob.Sigma = Matrix::Identity(n, n);
  prob.u_true = example_solution(id, prob.grid);
  prob.m0 = Vector::Zero(n);
  prob.label = example_name(id);
  return prob;
}

Vector WhitenedProblem::b_eigenvalues() const {
  return b_svd.singular_values.array().square();
}

Vector WhitenedProblem::omega_eigenvalues() const {
  const double p = prior_power;
  return k_svd.singular_values.array().pow(2.0 * p);
}

double WhitenedProblem::omega_trace() const {
  return omega_eigenvalues().sum();
}

Matrix WhitenedProblem::b_operator() const {
  if (prior_power == 0.0) return K;
  return b_svd.reconstruct();
}

Matrix WhitenedProblem::initial_covariance(double alpha) const {
  if (alpha <= 0) throw std::invalid_argument("initial covariance: alpha must be > 0");
  return omega / alpha;
}

Vector WhitenedProblem::source_coords() const {
  return k_svd.right_vectors.transpose() * source();
}

WhitenedProblem whiten(ProblemInstance prob, double p) {
  if (p < 0) throw std::invalid_argument("whiten: prior power p must be >= 0");
  WhitenedProblem wp;
  wp.prior_power = p;
  wp.sigma_is_identity = linalg::is_identity(prob.Sigma);

  Matrix k = wp.sigma_is_identity ? prob.A
                                  : linalg::spd_root_inverse(prob.Sigma) * prob.A;
  auto d = linalg::svd(k);
  if (d.spectral_norm() > 1.0 + 1e-12) {
    // ||K|| <= 1 is restored by rescaling the operator; the factor is kept.
    wp.rescale = d.spectral_norm();
    prob.A /= wp.rescale;
    k /= wp.rescale;
    d.singular_values /= wp.rescale;
  }
  wp.base = std::move(prob);
  wp.K = std::move(k);
  wp.k_svd = std::move(d);

  const int n = wp.dim();
  if (p == 0.0) {
    wp.omega = Matrix::Identity(n, n);
    wp.b_svd = wp.k_svd;
  } else {
    wp.omega = linalg::gram_function(wp.k_svd,
                                     [p](double x) { return std::pow(x, p); });
    wp.b_svd.singular_values =
        wp.k_svd.singular_values.array().pow(p + 1.0).matrix();
    wp.b_svd.left_vectors = wp.k_svd.left_vectors;
    wp.b_svd.right_vectors = wp.k_svd.right_vectors;
  }
  return wp;
}

WhitenedProblem diagonal_problem(const SpectrumModel& model, double p,
                                 const IndexFunction& source, int n) {
  if (n < 1) throw std::invalid_argument("diagonal_problem: n must be >= 1");
  if (p < 0) throw std::invalid_argument("diagonal_problem: p must be >= 0");
  if (model.kind == SpectrumModel::Kind::Polynomial && p > 0 &&
      2.0 * model.rate * p / (p + 1.0) <= 1.0) {
    throw std::invalid_argument(
        "diagonal_problem: polynomial spectrum with 2*theta*p/(p+1) <= 1 "
        "gives a prior covariance that is not trace class; increase theta "
        "or p");
  }
  SpectrumModel m = model;
  m.count = n;
  const Vector lambda = m.eigenvalues();  // eigenvalues of B^T B

  WhitenedProblem wp;
  wp.prior_power = p;
  wp.sigma_is_identity = true;

  Vector s(n);       // singular values of K
  Vector u_true(n);  // phi(K^T K) v with v = n^{-1/2} (1,..,1)
  for (int j = 0; j < n; ++j) {
    s[j] = std::pow(lambda[j], 0.5 / (p + 1.0));
    u_true[j] = source(s[j] * s[j]) / std::sqrt(double(n));
  }

  wp.base.grid = Grid::midpoints(n);
  wp.base.A = s.asDiagonal();
  wp.base.Sigma = Matrix::Identity(n, n);
  wp.base.u_true = u_true;
  wp.base.m0 = Vector::Zero(n);
  wp.base.label = "diagonal";
  wp.K = wp.base.A;
  wp.k_svd = {s, Matrix::Identity(n, n), Matrix::Identity(n, n)};
  wp.omega = s.array().pow(2.0 * p).matrix().asDiagonal();
  wp.b_svd = {lambda.cwiseSqrt(), Matrix::Identity(n, n),
              Matrix::Identity(n, n)};
  return wp;
}

}  // namespace dareg::problems
