#include "dareg/datagen.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "dareg/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "stream dumps assume a little-endian host");

namespace dareg::datagen {

std::size_t step_count(double T, double h) {
  if (!(h > 0) || T < h) {
    throw std::invalid_argument("stream: need 0 < h <= T");
  }
  return static_cast<std::size_t>(std::floor(T / h + 1e-9));
}

namespace {

DataStream make_stream(const problems::ProblemInstance& prob, double T,
                       double h, std::uint64_t seed, bool with_noise) {
  const std::size_t count = step_count(T, h);
  const int n = static_cast<int>(prob.A.rows());
  const Vector drift = h * (prob.A * prob.u_true);
  const double root_h = std::sqrt(h);

  const bool white = linalg::is_identity(prob.Sigma);
  Matrix sigma_root;
  if (with_noise && !white) sigma_root = linalg::spd_root(prob.Sigma);

  DataStream stream;
  stream.h = h;
  stream.T = T;
  stream.seed = seed;
  stream.problem_ref = prob.label;
  stream.increments.resize(count);
  Vector xi(n);
  for (std::size_t step = 1; step <= count; ++step) {
    if (!with_noise) {
      stream.increments[step - 1] = drift;
      continue;
    }
    for (int i = 0; i < n; ++i) {
      xi[i] = rng::standard_normal(seed, step, static_cast<std::uint64_t>(i));
    }
    if (white) {
      stream.increments[step - 1] = drift + root_h * xi;
    } else {
      stream.increments[step - 1] = drift + root_h * (sigma_root * xi);
    }
  }
  return stream;
}

}  // namespace

DataStream simulate_stream(const problems::ProblemInstance& prob, double T,
                           double h, std::uint64_t seed) {
  return make_stream(prob, T, h, seed, true);
}

DataStream zero_noise_stream(const problems::ProblemInstance& prob, double T,
                             double h) {
  return make_stream(prob, T, h, 0, false);
}

DataStream aggregate(const DataStream& stream, int factor) {
  if (factor < 1) throw std::invalid_argument("aggregate: factor must be >= 1");
  if (stream.steps() % factor != 0) {
    throw std::invalid_argument(
        "aggregate: step count is not divisible by the coarsening factor");
  }
  DataStream coarse;
  coarse.h = stream.h * factor;
  coarse.T = stream.T;
  coarse.seed = stream.seed;
  coarse.problem_ref = stream.problem_ref;
  coarse.increments.reserve(stream.steps() / factor);
  for (int k = 0; k < stream.steps(); k += factor) {
    Vector sum = stream.increments[k];
    for (int j = 1; j < factor; ++j) sum += stream.increments[k + j];
    coarse.increments.push_back(std::move(sum));
  }
  return coarse;
}

Vector averaged_datum(const DataStream& stream) {
  if (stream.increments.empty()) {
    throw std::invalid_argument("averaged_datum: empty stream");
  }
  const int n = stream.dim();
  // Kahan summation per component.
  Vector sum = Vector::Zero(n);
  Vector carry = Vector::Zero(n);
  for (const Vector& inc : stream.increments) {
    for (int i = 0; i < n; ++i) {
      const double y = inc[i] - carry[i];
      const double t = sum[i] + y;
      carry[i] = (t - sum[i]) - y;
      sum[i] = t;
    }
  }
  return sum / stream.T;
}

void write_stream(const DataStream& stream, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("write_stream: cannot open " + path);
  const std::uint64_t header[4] = {
      static_cast<std::uint64_t>(stream.dim()),
      std::bit_cast<std::uint64_t>(stream.T),
      std::bit_cast<std::uint64_t>(stream.h),
      stream.seed,
  };
  bool ok = std::fwrite(header, sizeof(header), 1, f) == 1;
  for (const Vector& inc : stream.increments) {
    ok = ok && std::fwrite(inc.data(), sizeof(double),
                           static_cast<std::size_t>(inc.size()),
                           f) == static_cast<std::size_t>(inc.size());
  }
  ok = std::fclose(f) == 0 && ok;
  if (!ok) throw std::runtime_error("write_stream: I/O failure on " + path);
}

DataStream read_stream(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("read_stream: cannot open " + path);
  std::uint64_t header[4];
  if (std::fread(header, sizeof(header), 1, f) != 1) {
    std::fclose(f);
    throw std::runtime_error("read_stream: truncated header in " + path);
  }
  DataStream stream;
  const auto n = static_cast<int>(header[0]);
  stream.T = std::bit_cast<double>(header[1]);
  stream.h = std::bit_cast<double>(header[2]);
  stream.seed = header[3];
  const std::size_t count = step_count(stream.T, stream.h);
  stream.increments.assign(count, Vector(n));
  for (auto& inc : stream.increments) {
    if (std::fread(inc.data(), sizeof(double), static_cast<std::size_t>(n),
                   f) != static_cast<std::size_t>(n)) {
      std::fclose(f);
      throw std::runtime_error("read_stream: truncated data in " + path);
    }
  }
  std::fclose(f);
  return stream;
}

}  // namespace dareg::datagen
