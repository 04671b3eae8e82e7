#include "nzl/verify.hpp"

#include <cmath>

namespace nzl {

Vector sample_unit_ball(Index d, Rng& rng, double radius) {
  Vector direction = rng.gaussian_vector(d);
  double norm = direction.norm();
  if (norm == 0.0) {
    direction = Vector::Unit(d, 0);
    norm = 1.0;
  }
  const double r = radius * std::pow(rng.uniform(0.0, 1.0),
                                     1.0 / static_cast<double>(d));
  return direction * (r / norm);
}

EquivalenceResult verify_equivalence(const std::function<Vector(const Vector&)>& f,
                                     const TargetNetwork& g, int samples,
                                     std::uint64_t seed, double radius) {
  require_shape(samples >= 1, "verify_equivalence: samples must be >= 1");
  Rng rng(seed);
  EquivalenceResult result;
  result.samples = samples;
  result.domain_radius = radius;
  double total = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vector x = sample_unit_ball(g.input_dim, rng, radius);
    const Vector fx = f(x);
    const Vector gx = forward_target(g, x);
    require_shape(fx.size() == gx.size(), "verify_equivalence: output dimension mismatch");
    const double err = (fx - gx).lpNorm<Eigen::Infinity>();
    result.max_abs_error = std::max(result.max_abs_error, err);
    total += err;
  }
  result.mean_abs_error = total / samples;
  return result;
}

EquivalenceResult verify_equivalence(const WideStack& f, const TargetNetwork& g,
                                     int samples, std::uint64_t seed, double radius) {
  return verify_equivalence(
      [&f](const Vector& x) { return forward_wide(f, x); }, g, samples, seed, radius);
}

EquivalenceResult verify_equivalence(const SkipStack& f, const TargetNetwork& g,
                                     int samples, std::uint64_t seed, double radius) {
  return verify_equivalence(
      [&f](const Vector& x) { return forward_skip(f, x); }, g, samples, seed, radius);
}

}  // namespace nzl
