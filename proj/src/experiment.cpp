#include "dareg/experiment.hpp"

#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "dareg/rng.hpp"

namespace dareg::experiment {

namespace {

using json = nlohmann::json;
using problems::WhitenedProblem;

constexpr std::uint64_t method_tag(EstimatorKind kind) {
  return static_cast<std::uint64_t>(kind) + 1;
}

bool is_filter(EstimatorKind kind) {
  return kind == EstimatorKind::NonStationaryArm ||
         kind == EstimatorKind::StationaryArm;
}

// Everything the Monte-Carlo kernels need, reduced to the SVD coordinates
// of K (data in the left basis, state in the right one). Valid because the
// experiment problems all have Sigma = I, where an isotropic Gaussian stays
// isotropic under the orthogonal change of basis.
struct SpectralHarness {
  Vector s;       // singular values of K
  Vector lambda;  // eigenvalues of B^T B
  Vector omega;   // eigenvalues of Omega
  Vector ut;      // V^T u_true
  Vector c0;      // V^T m0
  Vector drift;   // U^T A u_true = s .* ut

  explicit SpectralHarness(const WhitenedProblem& wp)
      : s(wp.k_svd.singular_values),
        lambda(wp.b_eigenvalues()),
        omega(wp.omega_eigenvalues()),
        ut(wp.k_svd.right_vectors.transpose() * wp.base.u_true),
        c0(wp.k_svd.right_vectors.transpose() * wp.base.m0),
        drift(s.cwiseProduct(ut)) {}

  int dim() const { return static_cast<int>(s.size()); }
};

struct Cell {
  EstimatorKind method;
  double T;
  double alpha;
};

double square(double x) { return x * x; }

double showalter_filter(double lambda, double eps) {
  if (lambda == 0.0) return 1.0 / eps;
  return -std::expm1(-lambda / eps) / lambda;
}

// V-basis multiplier of the reference estimators applied to U-basis data
// coordinates: q(B^T B) Omega^{1/2} K^T.
double reference_factor(EstimatorKind kind, double s, double p, double eps) {
  const double lambda = std::pow(s, 2.0 * (p + 1.0));
  const double q = kind == EstimatorKind::Tikhonov
                       ? 1.0 / (eps + lambda)
                       : showalter_filter(lambda, eps);
  return q * std::pow(s, p + 1.0);
}

// One Monte-Carlo repetition of a filter, entirely in spectral coordinates;
// returns the squared error of the final mean.
double filter_rep_sq_error(const SpectralHarness& hs, EstimatorKind method,
                           double alpha, double h, std::size_t steps,
                           std::uint64_t rep_seed, bool zero_noise, double p,
                           Vector& coeff, Vector& gamma) {
  const int n = hs.dim();
  coeff = hs.c0;
  for (int j = 0; j < n; ++j) gamma[j] = hs.omega[j] / alpha;
  const double root_h = std::sqrt(h);
  for (std::size_t k = 1; k <= steps; ++k) {
    for (int j = 0; j < n; ++j) {
      double w = h * hs.drift[j];
      if (!zero_noise) {
        w += root_h * rng::standard_normal(rep_seed, k,
                                           static_cast<std::uint64_t>(j));
      }
      coeff[j] += gamma[j] * hs.s[j] * (w - h * hs.s[j] * coeff[j]);
      if (method == EstimatorKind::NonStationaryArm) {
        const double g = gamma[j] * hs.s[j];
        gamma[j] -= h * g * g;
      }
    }
  }
  (void)p;
  double err = 0.0;
  for (int j = 0; j < n; ++j) err += square(coeff[j] - hs.ut[j]);
  return err;
}

// One repetition of a reference estimator on the averaged datum of a
// simulated stream with the same step protocol.
double reference_rep_sq_error(const SpectralHarness& hs, EstimatorKind method,
                              double alpha, double T, double h,
                              std::size_t steps, std::uint64_t rep_seed,
                              bool zero_noise, double p) {
  const int n = hs.dim();
  const double eps = alpha / T;
  const double root_h = std::sqrt(h);
  double err = 0.0;
  for (int j = 0; j < n; ++j) {
    // U-basis coordinate of z(T)/T.
    double noise = 0.0;
    if (!zero_noise) {
      double sum = 0.0, carry = 0.0;
      for (std::size_t k = 1; k <= steps; ++k) {
        const double y = rng::standard_normal(rep_seed, k,
                                              static_cast<std::uint64_t>(j)) -
                         carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
      }
      noise = root_h * sum / T;
    }
    const double ybar = (double(steps) * h / T) * hs.drift[j] + noise;
    const double factor = reference_factor(method, hs.s[j], p, eps);
    const double est = hs.c0[j] + factor * (ybar - hs.s[j] * hs.c0[j]);
    err += square(est - hs.ut[j]);
  }
  return err;
}

RmseRow evaluate_cell(const ExperimentConfig& cfg, const WhitenedProblem& wp,
                      const SpectralHarness& hs, const Cell& cell) {
  RmseRow row;
  row.example = example_kind_name(cfg.example);
  row.method = estimator_name(cell.method);
  row.p = cfg.p;
  row.n = cfg.n;
  row.T = cell.T;
  row.h = cfg.h_rule.step_for(cell.T);
  row.alpha = cell.alpha;
  row.reps = cfg.reps;
  row.seed = rng::derive(cfg.base_seed, rng::bits(cell.T),
                         rng::bits(cell.alpha), method_tag(cell.method));

  const std::size_t steps = datagen::step_count(cell.T, row.h);
  if (is_filter(cell.method)) {
    const double h_max = filters::max_stable_step(wp, cell.alpha);
    if (!(row.h < h_max)) {
      row.rmse = std::numeric_limits<double>::quiet_NaN();
      row.stderr_ = std::numeric_limits<double>::quiet_NaN();
      return row;
    }
  }

  Vector coeff(hs.dim()), gamma(hs.dim());
  std::vector<double> sq(cfg.reps);
  for (int rep = 0; rep < cfg.reps; ++rep) {
    const std::uint64_t rep_seed = rng::derive(row.seed, rep);
    sq[rep] = is_filter(cell.method)
                  ? filter_rep_sq_error(hs, cell.method, cell.alpha, row.h,
                                        steps, rep_seed, cfg.zero_noise,
                                        cfg.p, coeff, gamma)
                  : reference_rep_sq_error(hs, cell.method, cell.alpha,
                                           cell.T, row.h, steps, rep_seed,
                                           cfg.zero_noise, cfg.p);
  }
  double mean_sq = 0.0;
  for (double v : sq) mean_sq += v;
  mean_sq /= cfg.reps;
  double var_sq = 0.0;
  for (double v : sq) var_sq += square(v - mean_sq);
  var_sq = cfg.reps > 1 ? var_sq / (cfg.reps - 1.0) : 0.0;
  const double se_sq = std::sqrt(var_sq / cfg.reps);

  row.rmse = std::sqrt(mean_sq);
  row.stderr_ = row.rmse > 0 ? se_sq / (2.0 * row.rmse) : 0.0;
  return row;
}

// Index of the analytic-MSE argmin over the alpha grid; ties go to the
// larger alpha.
std::size_t analytic_argmin(const ExperimentConfig& cfg,
                            const WhitenedProblem& wp, EstimatorKind method,
                            double T) {
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  const double h = cfg.h_rule.step_for(T);
  for (std::size_t i = 0; i < cfg.alpha_grid.size(); ++i) {
    const double value = analytic_mse(wp, method, T, h, cfg.alpha_grid[i]);
    if (value <= best_value) {
      best_value = value;
      best = i;
    }
  }
  return best;
}

std::vector<Cell> plan_cells(const ExperimentConfig& cfg,
                             const WhitenedProblem& wp) {
  std::vector<Cell> cells;
  for (EstimatorKind method : cfg.methods) {
    for (double T : cfg.T_grid) {
      if (cfg.alpha_selection == AlphaSelection::GridOracleExact) {
        const std::size_t center = analytic_argmin(cfg, wp, method, T);
        const std::size_t lo =
            center > std::size_t(cfg.prune_window) ? center - cfg.prune_window : 0;
        const std::size_t hi = std::min(cfg.alpha_grid.size() - 1,
                                        center + cfg.prune_window);
        for (std::size_t i = lo; i <= hi; ++i) {
          cells.push_back({method, T, cfg.alpha_grid[i]});
        }
      } else {
        for (double alpha : cfg.alpha_grid) cells.push_back({method, T, alpha});
      }
    }
  }
  return cells;
}

}  // namespace

std::string example_kind_name(ExampleKind kind) {
  switch (kind) {
    case ExampleKind::Rough: return "rough";
    case ExampleKind::Intermediate: return "intermediate";
    case ExampleKind::Smooth: return "smooth";
    case ExampleKind::Diagonal: return "diagonal";
  }
  throw std::logic_error("unreachable");
}

ExampleKind example_kind_from_name(const std::string& name) {
  if (name == "rough") return ExampleKind::Rough;
  if (name == "intermediate") return ExampleKind::Intermediate;
  if (name == "smooth") return ExampleKind::Smooth;
  if (name == "diagonal") return ExampleKind::Diagonal;
  throw std::invalid_argument("unknown example: " + name);
}

std::string estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::NonStationaryArm: return "nonstat";
    case EstimatorKind::StationaryArm: return "stat";
    case EstimatorKind::Tikhonov: return "tikhonov";
    case EstimatorKind::Showalter: return "showalter";
  }
  throw std::logic_error("unreachable");
}

EstimatorKind estimator_from_name(const std::string& name) {
  if (name == "nonstat") return EstimatorKind::NonStationaryArm;
  if (name == "stat") return EstimatorKind::StationaryArm;
  if (name == "tikhonov") return EstimatorKind::Tikhonov;
  if (name == "showalter") return EstimatorKind::Showalter;
  throw std::invalid_argument("unknown method: " + name);
}

double HRule::step_for(double T) const {
  return kind == Kind::Fixed ? value : T / value;
}

ExperimentConfig::ExperimentConfig() {
  for (int i = 0; i <= 9; ++i) T_grid.push_back(100.0 * std::pow(2.0, i));
  for (int j = 0; j <= 39; ++j) alpha_grid.push_back(0.1 * std::pow(2.0, j));
}

void ExperimentConfig::validate() const {
  auto check_grid = [](const std::vector<double>& grid, const char* name) {
    if (grid.empty()) {
      throw std::invalid_argument(std::string("config: ") + name +
                                  " must not be empty");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!(grid[i] > 0)) {
        throw std::invalid_argument(std::string("config: ") + name +
                                    " entries must be positive");
      }
      if (i > 0 && grid[i] <= grid[i - 1]) {
        throw std::invalid_argument(std::string("config: ") + name +
                                    " must be strictly increasing");
      }
    }
  };
  check_grid(T_grid, "T_grid");
  check_grid(alpha_grid, "alpha_grid");
  if (reps < 1) throw std::invalid_argument("config: reps must be >= 1");
  if (n < 1) throw std::invalid_argument("config: n must be >= 1");
  if (example != ExampleKind::Diagonal && n < 2) {
    throw std::invalid_argument("config: n must be >= 2");
  }
  if (p < 0) throw std::invalid_argument("config: p must be >= 0");
  if (!(h_rule.value > 0)) {
    throw std::invalid_argument("config: h_rule value must be positive");
  }
  if (prune_window < 0) {
    throw std::invalid_argument("config: prune_window must be >= 0");
  }
  if (threads < 0) throw std::invalid_argument("config: threads must be >= 0");
  if (methods.empty()) {
    throw std::invalid_argument("config: methods must not be empty");
  }
}

ExperimentConfig paper_profile() { return ExperimentConfig{}; }

ExperimentConfig desk_profile() {
  ExperimentConfig cfg;
  cfg.n = 128;
  cfg.reps = 50;
  cfg.T_grid.clear();
  for (int i = 0; i <= 6; ++i) cfg.T_grid.push_back(100.0 * std::pow(2.0, i));
  cfg.alpha_selection = AlphaSelection::GridOracleExact;
  return cfg;
}

problems::WhitenedProblem build_problem(const ExperimentConfig& cfg) {
  if (cfg.example == ExampleKind::Diagonal) {
    const double nu = cfg.diagonal_nu > 0 ? cfg.diagonal_nu : cfg.p + 1.0;
    problems::SpectrumModel model{cfg.diagonal_kind, cfg.diagonal_rate, cfg.n};
    return problems::diagonal_problem(model, cfg.p,
                                      problems::IndexFunction::hoelder(nu),
                                      cfg.n);
  }
  problems::ExampleId id;
  switch (cfg.example) {
    case ExampleKind::Rough: id = problems::ExampleId::Rough; break;
    case ExampleKind::Intermediate: id = problems::ExampleId::Intermediate; break;
    default: id = problems::ExampleId::Smooth; break;
  }
  return problems::whiten(problems::make_example(id, cfg.n), cfg.p);
}

double analytic_mse(const problems::WhitenedProblem& wp, EstimatorKind method,
                    double T, double h, double alpha) {
  if (is_filter(method)) {
    const auto m = method == EstimatorKind::NonStationaryArm
                       ? filters::Method::NonStationaryArm
                       : filters::Method::StationaryArm;
    return analysis::mse_exact(wp, m, alpha, T).total;
  }
  // Reference estimator on the averaged datum: exact spectral bias and
  // variance with the actual step protocol (steps * h may differ from T
  // only through the floor).
  const std::size_t steps = datagen::step_count(T, h);
  const double eps = alpha / T;
  const double drift_scale = double(steps) * h / T;
  const double noise_var = double(steps) * h / (T * T);
  const Vector& s = wp.k_svd.singular_values;
  const Vector coords = wp.source_coords();
  const auto kind = method == EstimatorKind::Tikhonov ? EstimatorKind::Tikhonov
                                                      : EstimatorKind::Showalter;
  double total = 0.0;
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    const double factor = reference_factor(kind, s[j], wp.prior_power, eps);
    // mean estimate coordinate minus truth, for source = u_true - m0:
    // (factor * s * drift_scale - 1) acting on the source coordinate.
    const double bias = (1.0 - factor * s[j] * drift_scale) * coords[j];
    total += square(bias) + square(factor) * noise_var;
  }
  return total;
}

RmseTable run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const WhitenedProblem wp = build_problem(cfg);
  const SpectralHarness hs(wp);
  const std::vector<Cell> cells = plan_cells(cfg, wp);

  RmseTable table;
  table.rows.resize(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) break;
      table.rows[i] = evaluate_cell(cfg, wp, hs, cells[i]);
    }
  };
  unsigned requested = cfg.threads > 0 ? unsigned(cfg.threads)
                                       : std::thread::hardware_concurrency();
  requested = std::max(1u, std::min<unsigned>(requested, cells.size()));
  if (requested == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(requested);
    for (unsigned i = 0; i < requested; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return table;
}

double oracle_alpha(const ExperimentConfig& cfg, double T,
                    EstimatorKind method) {
  cfg.validate();
  const WhitenedProblem wp = build_problem(cfg);
  if (cfg.alpha_selection == AlphaSelection::GridOracleExact) {
    return cfg.alpha_grid[analytic_argmin(cfg, wp, method, T)];
  }
  ExperimentConfig single = cfg;
  single.methods = {method};
  single.T_grid = {T};
  single.alpha_selection = AlphaSelection::GridOracleMc;
  const RmseTable table = run_experiment(single);
  double best_alpha = cfg.alpha_grid.front();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : table.rows) {
    if (std::isnan(row.rmse)) continue;
    if (row.rmse <= best) {
      best = row.rmse;
      best_alpha = row.alpha;
    }
  }
  return best_alpha;
}

void write_csv(const RmseTable& table, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_csv: cannot open " + path);
  bool ok = std::fputs("example,method,p,n,T,h,alpha,rmse,stderr,reps,seed\n",
                       f) >= 0;
  for (const auto& r : table.rows) {
    ok = ok && std::fprintf(f, "%s,%s,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%" PRIu64 "\n",
                            r.example.c_str(), r.method.c_str(), r.p, r.n, r.T,
                            r.h, r.alpha, r.rmse, r.stderr_, r.reps,
                            r.seed) > 0;
  }
  ok = std::fclose(f) == 0 && ok;
  if (!ok) throw std::runtime_error("write_csv: I/O failure on " + path);
}

RmseTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "example,method,p,n,T,h,alpha,rmse,stderr,reps,seed") {
    throw std::runtime_error("read_csv: unexpected header in " + path);
  }
  RmseTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 11) {
      throw std::runtime_error("read_csv: malformed row: " + line);
    }
    RmseRow r;
    r.example = fields[0];
    r.method = fields[1];
    r.p = std::strtod(fields[2].c_str(), nullptr);
    r.n = std::atoi(fields[3].c_str());
    r.T = std::strtod(fields[4].c_str(), nullptr);
    r.h = std::strtod(fields[5].c_str(), nullptr);
    r.alpha = std::strtod(fields[6].c_str(), nullptr);
    r.rmse = std::strtod(fields[7].c_str(), nullptr);
    r.stderr_ = std::strtod(fields[8].c_str(), nullptr);
    r.reps = std::atoi(fields[9].c_str());
    r.seed = std::strtoull(fields[10].c_str(), nullptr, 10);
    table.rows.push_back(std::move(r));
  }
  return table;
}

namespace {

void parse_into(const json& j, ExperimentConfig& cfg) {
  static const std::vector<std::string> known = {
      "example", "methods", "p", "n", "T_grid", "alpha_grid", "h_rule",
      "reps", "base_seed", "alpha_selection", "output_path", "prune_window",
      "zero_noise", "threads", "diagonal_kind", "diagonal_rate", "diagonal_nu"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  if (j.contains("example")) {
    cfg.example = example_kind_from_name(j.at("example").get<std::string>());
  }
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& name : j.at("methods")) {
      cfg.methods.push_back(estimator_from_name(name.get<std::string>()));
    }
  }
  if (j.contains("p")) cfg.p = j.at("p").get<double>();
  if (j.contains("n")) cfg.n = j.at("n").get<int>();
  if (j.contains("T_grid")) {
    cfg.T_grid = j.at("T_grid").get<std::vector<double>>();
  }
  if (j.contains("alpha_grid")) {
    cfg.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
  }
  if (j.contains("h_rule")) {
    const auto& rule = j.at("h_rule");
    if (!rule.is_object() || rule.size() != 1 ||
        (!rule.contains("fixed") && !rule.contains("fraction"))) {
      throw std::invalid_argument(
          "config: h_rule must be {\"fixed\": h} or {\"fraction\": k}");
    }
    if (rule.contains("fixed")) {
      cfg.h_rule = {HRule::Kind::Fixed, rule.at("fixed").get<double>()};
    } else {
      cfg.h_rule = {HRule::Kind::Fraction, rule.at("fraction").get<double>()};
    }
  }
  if (j.contains("reps")) cfg.reps = j.at("reps").get<int>();
  if (j.contains("base_seed")) cfg.base_seed = j.at("base_seed").get<std::uint64_t>();
  if (j.contains("alpha_selection")) {
    const auto name = j.at("alpha_selection").get<std::string>();
    if (name == "grid_oracle_mc") {
      cfg.alpha_selection = AlphaSelection::GridOracleMc;
    } else if (name == "grid_oracle_exact") {
      cfg.alpha_selection = AlphaSelection::GridOracleExact;
    } else {
      throw std::invalid_argument("config: unknown alpha_selection '" + name + "'");
    }
  }
  if (j.contains("output_path")) {
    cfg.output_path = j.at("output_path").get<std::string>();
  }
  if (j.contains("prune_window")) cfg.prune_window = j.at("prune_window").get<int>();
  if (j.contains("zero_noise")) cfg.zero_noise = j.at("zero_noise").get<bool>();
  if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
  if (j.contains("diagonal_kind")) {
    const auto name = j.at("diagonal_kind").get<std::string>();
    if (name == "polynomial") {
      cfg.diagonal_kind = problems::SpectrumModel::Kind::Polynomial;
    } else if (name == "exponential") {
      cfg.diagonal_kind = problems::SpectrumModel::Kind::Exponential;
    } else {
      throw std::invalid_argument("config: unknown diagonal_kind '" + name + "'");
    }
  }
  if (j.contains("diagonal_rate")) cfg.diagonal_rate = j.at("diagonal_rate").get<double>();
  if (j.contains("diagonal_nu")) cfg.diagonal_nu = j.at("diagonal_nu").get<double>();
  cfg.validate();
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  ExperimentConfig cfg;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw std::invalid_argument("config: top-level JSON value must be an object");
  }
  parse_into(j, cfg);
  return cfg;
}

ExperimentConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::vector<MinRmsePoint> min_rmse_per_time(const RmseTable& table,
                                            EstimatorKind method) {
  const std::string name = estimator_name(method);
  std::map<double, MinRmsePoint> best;
  for (const auto& row : table.rows) {
    if (row.method != name || std::isnan(row.rmse)) continue;
    auto it = best.find(row.T);
    if (it == best.end() || row.rmse <= it->second.rmse) {
      best[row.T] = {row.T, row.rmse, row.alpha};
    }
  }
  std::vector<MinRmsePoint> points;
  points.reserve(best.size());
  for (const auto& [_, point] : best) points.push_back(point);
  return points;
}

}  // namespace dareg::experiment
