#pragma once

#include "nzl/matrix.hpp"

#include <cstdint>
#include <random>

namespace nzl {

// splitmix64; used to derive decorrelated sub-streams from one user seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum class WeightDist { kUniform, kGaussian };

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix_seed(seed, 0)) {}

  std::uint64_t seed() const { return seed_; }
  Rng derive(std::uint64_t stream) const { return Rng(mix_seed(seed_, stream)); }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double gaussian() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  bool bernoulli(double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_) < p;
  }
  std::uint64_t next_u64() { return engine_(); }

  // Entries are drawn in row-major order.
  Matrix uniform_matrix(Index rows, Index cols, double lo = -1.0, double hi = 1.0) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
    return m;
  }
  Matrix gaussian_matrix(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = gaussian();
    return m;
  }
  Matrix random_matrix(Index rows, Index cols, WeightDist dist) {
    return dist == WeightDist::kUniform ? uniform_matrix(rows, cols)
                                        : gaussian_matrix(rows, cols);
  }
  Vector uniform_vector(Index len, double lo = -1.0, double hi = 1.0) {
    Vector v(len);
    for (Index i = 0; i < len; ++i) v(i) = uniform(lo, hi);
    return v;
  }
  Vector gaussian_vector(Index len) {
    Vector v(len);
    for (Index i = 0; i < len; ++i) v(i) = gaussian();
    return v;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace nzl
