#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nzl {

// Row-major storage throughout; serialized data and vec() follow the same order.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Product shapes above this entry count are rejected before allocation.
inline constexpr std::int64_t kSizeCapEntries = 100'000'000;

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SizeCapExceeded : std::length_error {
  using std::length_error::length_error;
};

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

inline void require_product_size(std::int64_t rows, std::int64_t cols,
                                 std::int64_t cap = kSizeCapEntries) {
  if (rows <= 0 || cols <= 0) return;
  if (rows > cap / cols) {
    throw SizeCapExceeded("product shape " + std::to_string(rows) + "x" +
                          std::to_string(cols) + " exceeds the size cap");
  }
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline Vector relu(const Vector& v) { return v.cwiseMax(0.0); }

// Row-major vectorization (row by row), matching the Khatri-Rao recast.
inline Vector vec_rowmajor(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

}  // namespace nzl
