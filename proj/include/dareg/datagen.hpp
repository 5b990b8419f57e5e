#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dareg/problems.hpp"

namespace dareg::datagen {

/// Seeded sequence of observation increments of the process
/// dz = A u dt + sqrt(Sigma) dW on [0, T] with step h:
///   dz_n = h A u_true + sqrt(h) Sigma^{1/2} xi_n,
/// where the xi_n are standard Gaussian vectors drawn from a counter-based
/// stream indexed by (seed, n). Identical (seed, problem, T, h) give a
/// bit-identical stream, independently of evaluation order.
struct DataStream {
  std::vector<Vector> increments;
  double h = 0.0;
  double T = 0.0;
  std::uint64_t seed = 0;
  std::string problem_ref;

  int steps() const { return static_cast<int>(increments.size()); }
  int dim() const { return increments.empty() ? 0 : static_cast<int>(increments[0].size()); }
};

/// Number of increments on [0, T] with step h (floor of T/h, tolerant of
/// floating point division).
std::size_t step_count(double T, double h);

DataStream simulate_stream(const problems::ProblemInstance& prob, double T,
                           double h, std::uint64_t seed);

/// Drift-only stream (no noise injected); used for debugging and for
/// matched-data comparisons against deterministic references.
DataStream zero_noise_stream(const problems::ProblemInstance& prob, double T,
                             double h);

/// Coarsens a stream by summing consecutive groups of `factor` increments.
/// The step count must be divisible by `factor`. Coarse increments equal
/// sums of fine ones exactly, so step-halving studies can run on the same
/// underlying path.
DataStream aggregate(const DataStream& stream, int factor);

/// z(T)/T, with z(T) the compensated cumulative sum of the increments.
Vector averaged_datum(const DataStream& stream);

/// Binary dump: header of four little-endian 64-bit fields
/// (dim, T, h, seed), then the increments as 64-bit floats, row-major.
void write_stream(const DataStream& stream, const std::string& path);
DataStream read_stream(const std::string& path);

}  // namespace dareg::datagen
