#include "nzl/boolean_det.hpp"

#include <cstdint>
#include <vector>

namespace nzl {

namespace {

std::vector<std::uint32_t> to_row_bits(const Matrix& b, const char* who) {
  require_shape(b.rows() == b.cols(), std::string(who) + ": matrix is not square");
  require_shape(b.rows() <= 32, std::string(who) + ": dimension above 32 unsupported");
  std::vector<std::uint32_t> rows(static_cast<std::size_t>(b.rows()), 0);
  for (Index i = 0; i < b.rows(); ++i) {
    for (Index j = 0; j < b.cols(); ++j) {
      const double e = b(i, j);
      if (e != 0.0 && e != 1.0) throw ShapeError(std::string(who) + ": entry is not 0/1");
      if (e == 1.0) rows[static_cast<std::size_t>(i)] |= (1u << j);
    }
  }
  return rows;
}

// Expansion state: the set of still-unused rows. The current column index is
// implied (d - |rows|), so the memo key is the row mask alone.
int expand(const std::vector<std::uint32_t>& rows, std::uint32_t row_mask, int dim,
           std::vector<std::int8_t>& memo) {
  std::int8_t& slot = memo[row_mask];
  if (slot >= 0) return slot;
  const int col = dim - __builtin_popcount(row_mask);
  if (col == dim) return slot = 1;
  int value = 0;
  for (int i = 0; i < dim && value == 0; ++i) {
    const std::uint32_t bit = 1u << i;
    if ((row_mask & bit) && (rows[static_cast<std::size_t>(i)] & (1u << col)))
      value = expand(rows, row_mask & ~bit, dim, memo);
  }
  return slot = static_cast<std::int8_t>(value);
}

bool augment(const std::vector<std::uint32_t>& rows, int col, int dim,
             std::vector<int>& match_row, std::uint32_t& visited) {
  for (int i = 0; i < dim; ++i) {
    const std::uint32_t bit = 1u << i;
    if (!(rows[static_cast<std::size_t>(i)] & (1u << col)) || (visited & bit)) continue;
    visited |= bit;
    if (match_row[static_cast<std::size_t>(i)] < 0 ||
        augment(rows, match_row[static_cast<std::size_t>(i)], dim, match_row, visited)) {
      match_row[static_cast<std::size_t>(i)] = col;
      return true;
    }
  }
  return false;
}

}  // namespace

int boolean_det(const Matrix& b) {
  const auto rows = to_row_bits(b, "boolean_det");
  const int dim = static_cast<int>(b.rows());
  if (dim == 0) return 1;
  if (b.rows() > kBooleanDetMemoMaxDim) return boolean_det_matching(b);
  std::vector<std::int8_t> memo(1u << dim, -1);
  const std::uint32_t full = dim == 32 ? ~0u : ((1u << dim) - 1u);
  return expand(rows, full, dim, memo);
}

int boolean_det_matching(const Matrix& b) {
  const auto rows = to_row_bits(b, "boolean_det_matching");
  const int dim = static_cast<int>(b.rows());
  std::vector<int> match_row(static_cast<std::size_t>(dim), -1);
  for (int col = 0; col < dim; ++col) {
    std::uint32_t visited = 0;
    if (!augment(rows, col, dim, match_row, visited)) return 0;
  }
  return 1;
}

}  // namespace nzl
