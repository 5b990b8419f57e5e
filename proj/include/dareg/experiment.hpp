#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dareg/analysis.hpp"

namespace dareg::experiment {

enum class ExampleKind { Rough, Intermediate, Smooth, Diagonal };
enum class EstimatorKind { NonStationaryArm, StationaryArm, Tikhonov, Showalter };
enum class AlphaSelection { GridOracleMc, GridOracleExact };

std::string example_kind_name(ExampleKind kind);
ExampleKind example_kind_from_name(const std::string& name);
std::string estimator_name(EstimatorKind kind);
EstimatorKind estimator_from_name(const std::string& name);

struct HRule {
  enum class Kind { Fixed, Fraction };
  Kind kind = Kind::Fraction;
  double value = 100.0;  // step for Fixed, divisor k of h = T/k for Fraction

  double step_for(double T) const;
};

/// Full description of a Monte-Carlo RMSE experiment over (method, T, alpha)
/// grids. Results are a pure function of the configuration, independent of
/// scheduling and worker count.
struct ExperimentConfig {
  ExampleKind example = ExampleKind::Rough;
  std::vector<EstimatorKind> methods{EstimatorKind::NonStationaryArm,
                                     EstimatorKind::StationaryArm};
  double p = 0.0;
  int n = 512;
  std::vector<double> T_grid;      // default: 100 * 2^i, i = 0..9
  std::vector<double> alpha_grid;  // default: 0.1 * 2^j, j = 0..39
  HRule h_rule{};
  int reps = 100;
  std::uint64_t base_seed = 12345;
  AlphaSelection alpha_selection = AlphaSelection::GridOracleMc;
  std::string output_path = "results.csv";
  /// Half-width (in grid positions) of the alpha window kept around the
  /// analytic argmin when alpha_selection = grid_oracle_exact.
  int prune_window = 3;
  /// Debug switch: inject no noise, so the RMSE equals the recursion bias.
  bool zero_noise = false;
  int threads = 0;  // 0 = hardware concurrency

  // Synthetic diagonal example parameters.
  problems::SpectrumModel::Kind diagonal_kind =
      problems::SpectrumModel::Kind::Polynomial;
  double diagonal_rate = 2.0;
  double diagonal_nu = 0.0;  // Hoelder source exponent; 0 means p + 1

  ExperimentConfig();
  void validate() const;
};

/// Paper-scale preset (n = 512, M = 100, ten ending times).
ExperimentConfig paper_profile();
/// Reduced preset that runs in minutes (n = 128, M = 50, seven ending
/// times, analytically pruned alpha grid).
ExperimentConfig desk_profile();

struct RmseRow {
  std::string example;
  std::string method;
  double p = 0.0;
  int n = 0;
  double T = 0.0;
  double h = 0.0;
  double alpha = 0.0;
  double rmse = 0.0;    // NaN flags a stability failure
  double stderr_ = 0.0; // delta-method standard error of the RMSE
  int reps = 0;
  std::uint64_t seed = 0;  // per-cell seed all repetition seeds derive from
};

struct RmseTable {
  std::vector<RmseRow> rows;
};

RmseTable run_experiment(const ExperimentConfig& cfg);

/// Grid argmin of the RMSE over alpha for one (T, method), either from the
/// Monte-Carlo estimate or from the analytic mean squared error. Ties break
/// toward larger alpha.
double oracle_alpha(const ExperimentConfig& cfg, double T, EstimatorKind method);

/// CSV with the fixed header example,method,p,n,T,h,alpha,rmse,stderr,reps,seed
/// and 17 significant digits per float; reading back reproduces the table
/// bitwise.
void write_csv(const RmseTable& table, const std::string& path);
RmseTable read_csv(const std::string& path);

/// JSON config file whose keys match the ExperimentConfig field names.
/// Omitted fields keep their defaults; unknown keys are rejected.
ExperimentConfig read_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

struct MinRmsePoint {
  double T = 0.0;
  double rmse = 0.0;
  double alpha = 0.0;
};

/// Per-T minimum of the finite RMSE values of one method, ordered by T.
std::vector<MinRmsePoint> min_rmse_per_time(const RmseTable& table,
                                            EstimatorKind method);

/// Problem instance named by the configuration, already whitened.
problems::WhitenedProblem build_problem(const ExperimentConfig& cfg);

/// Analytic mean squared error of an estimator at (T, alpha): the exact
/// bias-variance sum for the two filters, and its spectral analogue for the
/// two reference estimators on the averaged datum.
double analytic_mse(const problems::WhitenedProblem& wp, EstimatorKind method,
                    double T, double h, double alpha);

}  // namespace dareg::experiment
