#include "nzl/products.hpp"

namespace nzl {

Matrix kron(const Matrix& a, const Matrix& b) {
  require_product_size(static_cast<std::int64_t>(a.rows()) * b.rows(),
                       static_cast<std::int64_t>(a.cols()) * b.cols());
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  require_shape(a.cols() == b.cols(),
                "khatri_rao: column counts differ (" + std::to_string(a.cols()) +
                    " vs " + std::to_string(b.cols()) + ")");
  require_product_size(static_cast<std::int64_t>(a.rows()) * b.rows(), a.cols());
  Matrix out(a.rows() * b.rows(), a.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      out.col(j).segment(i * b.rows(), b.rows()) = a(i, j) * b.col(j);
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(),
                "hadamard: shape mismatch");
  return a.cwiseProduct(b);
}

namespace {
void require_boolean(const Matrix& m, const char* who) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0 && m(i, j) != 1.0)
        throw ShapeError(std::string(who) + ": entry is not 0/1");
}
}  // namespace

Matrix boolean_khatri_rao(const Matrix& a, const Matrix& b) {
  require_boolean(a, "boolean_khatri_rao");
  require_boolean(b, "boolean_khatri_rao");
  // AND coincides with the real product on {0,1} entries.
  return khatri_rao(a, b);
}

}  // namespace nzl
