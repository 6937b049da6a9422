#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace xdboost {

// Encoded feature rows. Column order is: categorical indices, continuous
// values, then the error-placeholder block (stored with the continuous
// values as their last `placeholders()` columns).
class DesignMatrix {
 public:
  DesignMatrix() = default;
  DesignMatrix(std::size_t rows, std::size_t categorical, std::size_t continuous);

  std::size_t rows() const { return rows_; }
  std::size_t categorical_cols() const { return n_cat_; }
  // Continuous columns including placeholders.
  std::size_t continuous_cols() const { return n_cont_; }
  std::size_t placeholders() const { return n_placeholders_; }
  std::size_t cols() const { return n_cat_ + n_cont_; }

  std::int32_t& cat(std::size_t row, std::size_t field) { return cat_[row * n_cat_ + field]; }
  std::int32_t cat(std::size_t row, std::size_t field) const { return cat_[row * n_cat_ + field]; }
  double& cont(std::size_t row, std::size_t field) { return cont_[row * n_cont_ + field]; }
  double cont(std::size_t row, std::size_t field) const { return cont_[row * n_cont_ + field]; }

  // Index of placeholder `i` among the continuous columns.
  std::size_t placeholder_col(std::size_t i) const;
  double placeholder(std::size_t row, std::size_t i) const { return cont(row, placeholder_col(i)); }
  void set_placeholder_column(std::size_t i, std::span<const double> values);
  std::vector<double> placeholder_column(std::size_t i) const;
  bool placeholders_zero() const;

  // Copy restricted to the listed rows, in the listed order.
  DesignMatrix select_rows(std::span<const std::size_t> rows) const;

  bool operator==(const DesignMatrix&) const = default;

 private:
  friend DesignMatrix append_placeholders(const DesignMatrix& x, std::size_t n);

  std::size_t rows_ = 0;
  std::size_t n_cat_ = 0;
  std::size_t n_cont_ = 0;
  std::size_t n_placeholders_ = 0;
  std::vector<std::int32_t> cat_;
  std::vector<double> cont_;
};

// Appends `n` zero placeholder columns. Throws UsageError if `x` already
// carries placeholders or n == 0.
DesignMatrix append_placeholders(const DesignMatrix& x, std::size_t n);

}  // namespace xdboost
