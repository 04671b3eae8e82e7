#pragma once

#include "nzl/matrix.hpp"
#include "nzl/rng.hpp"

#include <cmath>

namespace nzl::testutil {

inline double rel_fro_error(const Matrix& a, const Matrix& b) {
  const double scale = b.norm();
  return (a - b).norm() / (scale > 0.0 ? scale : 1.0);
}

inline Matrix random_rank(Rng& rng, Index rows, Index cols, Index rank) {
  return rng.uniform_matrix(rows, rank) * rng.uniform_matrix(rank, cols);
}

// Exact rank of an integer matrix by fraction-free (Bareiss) elimination.
// Entries must stay within int64 range, which holds for the small hand-built
// cases this backs.
inline int exact_integer_rank(std::vector<std::vector<long long>> m) {
  if (m.empty() || m[0].empty()) return 0;
  const std::size_t rows = m.size(), cols = m[0].size();
  int rank = 0;
  long long prev = 1;
  std::size_t row = 0;
  for (std::size_t col = 0; col < cols && row < rows; ++col) {
    std::size_t pivot = row;
    while (pivot < rows && m[pivot][col] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(m[pivot], m[row]);
    for (std::size_t i = row + 1; i < rows; ++i) {
      for (std::size_t j = col + 1; j < cols; ++j)
        m[i][j] = (m[row][col] * m[i][j] - m[i][col] * m[row][j]) / prev;
      m[i][col] = 0;
    }
    prev = m[row][col];
    ++row;
    ++rank;
  }
  return rank;
}

}  // namespace nzl::testutil
