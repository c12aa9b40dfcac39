#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace betacnmf {

/// Clamp floor shared by divisions, negative powers and the loss.
inline constexpr double kDefaultEps = 1e-12;

/// Dense row-major matrix whose entries are all >= 0.
///
/// Values are immutable once built; every operation below returns a new
/// matrix. The checked constructors reject negative and NaN entries, while
/// `unchecked` is reserved for kernels whose arithmetic preserves the
/// invariant by construction.
class NonnegMatrix {
 public:
  NonnegMatrix() = default;
  NonnegMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  NonnegMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  NonnegMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static NonnegMatrix unchecked(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const;

  std::span<const double> values() const noexcept { return data_; }
  std::span<const double> row(std::size_t r) const noexcept {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }

  bool same_shape(const NonnegMatrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const NonnegMatrix&, const NonnegMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Columnwise right shift by `m`, zero filled; size preserving.
NonnegMatrix right_shift(const NonnegMatrix& x, std::size_t m);
/// Columnwise left shift by `m`, zero filled; size preserving.
NonnegMatrix left_shift(const NonnegMatrix& x, std::size_t m);

NonnegMatrix hadamard(const NonnegMatrix& a, const NonnegMatrix& b);

/// a -> max(a, eps)^p for p < 0, a^p otherwise (0^0 = 1).
NonnegMatrix entrywise_pow(const NonnegMatrix& a, double p, double eps = kDefaultEps);

/// a / max(b, eps), entrywise.
NonnegMatrix safe_divide(const NonnegMatrix& a, const NonnegMatrix& b, double eps = kDefaultEps);

NonnegMatrix add(const NonnegMatrix& a, const NonnegMatrix& b);
NonnegMatrix scale(const NonnegMatrix& a, double factor);

/// a * b
NonnegMatrix multiply(const NonnegMatrix& a, const NonnegMatrix& b);
/// a * b^T
NonnegMatrix multiply_abt(const NonnegMatrix& a, const NonnegMatrix& b);
/// a^T * b
NonnegMatrix multiply_atb(const NonnegMatrix& a, const NonnegMatrix& b);

double sum(const NonnegMatrix& a) noexcept;

/// max |a - b| / max(|a|, |b|, floor) over all entries.
double max_relative_difference(const NonnegMatrix& a, const NonnegMatrix& b,
                               double floor = 1e-300);

}  // namespace betacnmf
