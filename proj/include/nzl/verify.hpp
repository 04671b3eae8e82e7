#pragma once

#include "nzl/network.hpp"

#include <cstdint>
#include <functional>

namespace nzl {

struct EquivalenceResult {
  int samples = 0;
  double max_abs_error = 0.0;
  double mean_abs_error = 0.0;
  double domain_radius = 1.0;
};

/// Uniform draw from the radius-ball: Gaussian direction times radius * U^(1/d).
Vector sample_unit_ball(Index d, Rng& rng, double radius = 1.0);

/// Max/mean infinity-norm error between f and the target over ball samples.
EquivalenceResult verify_equivalence(const std::function<Vector(const Vector&)>& f,
                                     const TargetNetwork& g, int samples,
                                     std::uint64_t seed, double radius = 1.0);

EquivalenceResult verify_equivalence(const WideStack& f, const TargetNetwork& g,
                                     int samples, std::uint64_t seed,
                                     double radius = 1.0);

EquivalenceResult verify_equivalence(const SkipStack& f, const TargetNetwork& g,
                                     int samples, std::uint64_t seed,
                                     double radius = 1.0);

}  // namespace nzl
