#include "nzl/boolean_det.hpp"

#include "nzl/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

using namespace nzl;

namespace {

// Brute-force oracle: 1 iff some permutation has an all-ones product.
int permutation_oracle(const Matrix& b) {
  const int d = static_cast<int>(b.rows());
  std::vector<int> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (int i = 0; i < d && ok; ++i)
      ok = b(perm[static_cast<std::size_t>(i)], i) == 1.0;
    if (ok) return 1;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return 0;
}

Matrix from_bits(unsigned bits, int d) {
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      m(i, j) = (bits >> (i * d + j)) & 1u ? 1.0 : 0.0;
  return m;
}

Matrix random_boolean(Rng& rng, int d, double p = 0.5) {
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rng.bernoulli(p) ? 1.0 : 0.0;
  return m;
}

}  // namespace

TEST_CASE("boolean_det unit cases") {
  CHECK(boolean_det(Matrix::Identity(4, 4)) == 1);
  CHECK(boolean_det(Matrix::Zero(3, 3)) == 0);
  // Expanding along the first column: both cofactors hit a zero row.
  Matrix m(2, 2);
  m << 1.0, 1.0, 0.0, 0.0;
  CHECK(boolean_det(m) == 0);
}

TEST_CASE("boolean_det rejects non-Boolean entries and non-square input") {
  Matrix bad(1, 1);
  bad << 2.0;
  CHECK_THROWS_AS(boolean_det(bad), ShapeError);
  CHECK_THROWS_AS(boolean_det(Matrix::Zero(2, 3)), ShapeError);
}

TEST_CASE("boolean_det exhaustive agreement up to 3x3") {
  for (int d = 1; d <= 3; ++d) {
    const unsigned total = 1u << (d * d);
    for (unsigned bits = 0; bits < total; ++bits) {
      const Matrix m = from_bits(bits, d);
      const int oracle = permutation_oracle(m);
      CHECK(boolean_det(m) == oracle);
      CHECK(boolean_det_matching(m) == oracle);
    }
  }
}

TEST_CASE("boolean_det random 4x4 agreement") {
  for (int trial = 0; trial < 2000; ++trial) {
    Rng rng(mix_seed(51, trial));
    const Matrix m = random_boolean(rng, 4, 0.3 + 0.4 * (trial % 3));
    const int oracle = permutation_oracle(m);
    CHECK(boolean_det(m) == oracle);
    CHECK(boolean_det_matching(m) == oracle);
  }
}

TEST_CASE("boolean_det is monotone under bitwise OR") {
  for (int trial = 0; trial < 300; ++trial) {
    Rng rng(mix_seed(53, trial));
    const Matrix a = random_boolean(rng, 4);
    const Matrix b = random_boolean(rng, 4);
    const Matrix ored = a.cwiseMax(b);
    if (boolean_det(a) == 1) CHECK(boolean_det(ored) == 1);
  }
}
