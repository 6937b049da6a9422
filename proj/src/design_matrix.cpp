#include "xdboost/design_matrix.hpp"

#include "xdboost/error.hpp"

#include <algorithm>
#include <string>

namespace xdboost {

DesignMatrix::DesignMatrix(std::size_t rows, std::size_t categorical, std::size_t continuous)
    : rows_(rows),
      n_cat_(categorical),
      n_cont_(continuous),
      cat_(rows * categorical, 0),
      cont_(rows * continuous, 0.0) {}

std::size_t DesignMatrix::placeholder_col(std::size_t i) const {
  if (i >= n_placeholders_) {
    throw UsageError("placeholder " + std::to_string(i) + " out of range (matrix has " +
                     std::to_string(n_placeholders_) + ")");
  }
  return n_cont_ - n_placeholders_ + i;
}

void DesignMatrix::set_placeholder_column(std::size_t i, std::span<const double> values) {
  const std::size_t col = placeholder_col(i);
  if (values.size() != rows_) {
    throw InputError("placeholder column needs " + std::to_string(rows_) + " values, got " +
                     std::to_string(values.size()));
  }
  for (std::size_t r = 0; r < rows_; ++r) cont(r, col) = values[r];
}

std::vector<double> DesignMatrix::placeholder_column(std::size_t i) const {
  const std::size_t col = placeholder_col(i);
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = cont(r, col);
  return out;
}

bool DesignMatrix::placeholders_zero() const {
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = n_cont_ - n_placeholders_; c < n_cont_; ++c) {
      if (cont(r, c) != 0.0) return false;
    }
  }
  return true;
}

DesignMatrix DesignMatrix::select_rows(std::span<const std::size_t> rows) const {
  DesignMatrix out(rows.size(), n_cat_, n_cont_);
  out.n_placeholders_ = n_placeholders_;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t r = rows[k];
    if (r >= rows_) throw InputError("select_rows: row " + std::to_string(r) + " out of range");
    std::copy_n(cat_.begin() + static_cast<std::ptrdiff_t>(r * n_cat_), n_cat_,
                out.cat_.begin() + static_cast<std::ptrdiff_t>(k * n_cat_));
    std::copy_n(cont_.begin() + static_cast<std::ptrdiff_t>(r * n_cont_), n_cont_,
                out.cont_.begin() + static_cast<std::ptrdiff_t>(k * n_cont_));
  }
  return out;
}

DesignMatrix append_placeholders(const DesignMatrix& x, std::size_t n) {
  if (x.n_placeholders_ != 0) {
    throw UsageError("append_placeholders: matrix already carries " +
                     std::to_string(x.n_placeholders_) + " placeholder columns");
  }
  if (n == 0) throw UsageError("append_placeholders: need at least one placeholder column");
  DesignMatrix out(x.rows_, x.n_cat_, x.n_cont_ + n);
  out.n_placeholders_ = n;
  out.cat_ = x.cat_;
  for (std::size_t r = 0; r < x.rows_; ++r) {
    std::copy_n(x.cont_.begin() + static_cast<std::ptrdiff_t>(r * x.n_cont_), x.n_cont_,
                out.cont_.begin() + static_cast<std::ptrdiff_t>(r * out.n_cont_));
  }
  return out;
}

}  // namespace xdboost
