#include "betacnmf/nnmat.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "betacnmf/errors.hpp"

namespace betacnmf {

namespace {

std::string shape_str(const NonnegMatrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

void require_same_shape(const NonnegMatrix& a, const NonnegMatrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " +
                         shape_str(b));
  }
}

void require_positive_dims(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw ValidationError("matrix dimensions must be positive");
  }
}

}  // namespace

NonnegMatrix::NonnegMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols) {
  require_positive_dims(rows, cols);
  if (!(fill >= 0.0)) throw ValidationError("fill value must be nonnegative");
  data_.assign(rows * cols, fill);
}

NonnegMatrix::NonnegMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require_positive_dims(rows, cols);
  if (data_.size() != rows * cols) {
    throw DimensionError("data length " + std::to_string(data_.size()) + " does not match " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
  for (double v : data_) {
    if (!(v >= 0.0)) throw ValidationError("matrix entries must be nonnegative");
  }
}

NonnegMatrix::NonnegMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<double> data;
  const std::size_t cols = rows.size() ? rows.begin()->size() : 0;
  for (const auto& r : rows) {
    if (r.size() != cols) throw DimensionError("ragged matrix literal");
    data.insert(data.end(), r.begin(), r.end());
  }
  *this = NonnegMatrix(rows.size(), cols, std::move(data));
}

NonnegMatrix NonnegMatrix::unchecked(std::size_t rows, std::size_t cols,
                                     std::vector<double> data) {
  NonnegMatrix out;
  out.rows_ = rows;
  out.cols_ = cols;
  out.data_ = std::move(data);
  return out;
}

double NonnegMatrix::at(std::size_t r, std::size_t c) const {
  if (r >= rows_ || c >= cols_) throw DimensionError("index out of range");
  return (*this)(r, c);
}

NonnegMatrix right_shift(const NonnegMatrix& x, std::size_t m) {
  std::vector<double> out(x.size(), 0.0);
  const std::size_t cols = x.cols();
  if (m < cols) {
    for (std::size_t r = 0; r < x.rows(); ++r) {
      auto src = x.row(r);
      std::copy(src.begin(), src.end() - static_cast<std::ptrdiff_t>(m),
                out.begin() + static_cast<std::ptrdiff_t>(r * cols + m));
    }
  }
  return NonnegMatrix::unchecked(x.rows(), cols, std::move(out));
}

NonnegMatrix left_shift(const NonnegMatrix& x, std::size_t m) {
  std::vector<double> out(x.size(), 0.0);
  const std::size_t cols = x.cols();
  if (m < cols) {
    for (std::size_t r = 0; r < x.rows(); ++r) {
      auto src = x.row(r);
      std::copy(src.begin() + static_cast<std::ptrdiff_t>(m), src.end(),
                out.begin() + static_cast<std::ptrdiff_t>(r * cols));
    }
  }
  return NonnegMatrix::unchecked(x.rows(), cols, std::move(out));
}

NonnegMatrix hadamard(const NonnegMatrix& a, const NonnegMatrix& b) {
  require_same_shape(a, b, "hadamard");
  std::vector<double> out(a.size());
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return NonnegMatrix::unchecked(a.rows(), a.cols(), std::move(out));
}

NonnegMatrix entrywise_pow(const NonnegMatrix& a, double p, double eps) {
  std::vector<double> out(a.size());
  auto av = a.values();
  // Integer exponents hit by beta in {0, 1, 2} get exact fast paths.
  if (p == 0.0) {
    std::fill(out.begin(), out.end(), 1.0);
  } else if (p == 1.0) {
    std::copy(av.begin(), av.end(), out.begin());
  } else if (p == 2.0) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * av[i];
  } else if (p == -1.0) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / std::max(av[i], eps);
  } else if (p == -2.0) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double c = std::max(av[i], eps);
      out[i] = 1.0 / (c * c);
    }
  } else if (p < 0.0) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::pow(std::max(av[i], eps), p);
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::pow(av[i], p);
  }
  return NonnegMatrix::unchecked(a.rows(), a.cols(), std::move(out));
}

NonnegMatrix safe_divide(const NonnegMatrix& a, const NonnegMatrix& b, double eps) {
  require_same_shape(a, b, "safe_divide");
  std::vector<double> out(a.size());
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] / std::max(bv[i], eps);
  return NonnegMatrix::unchecked(a.rows(), a.cols(), std::move(out));
}

NonnegMatrix add(const NonnegMatrix& a, const NonnegMatrix& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return NonnegMatrix::unchecked(a.rows(), a.cols(), std::move(out));
}

NonnegMatrix scale(const NonnegMatrix& a, double factor) {
  if (!(factor >= 0.0)) throw ValidationError("scale factor must be nonnegative");
  std::vector<double> out(a.values().begin(), a.values().end());
  for (double& v : out) v *= factor;
  return NonnegMatrix::unchecked(a.rows(), a.cols(), std::move(out));
}

NonnegMatrix multiply(const NonnegMatrix& a, const NonnegMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("multiply: " + shape_str(a) + " * " + shape_str(b));
  }
  const std::size_t n = b.cols();
  std::vector<double> out(a.rows() * n, 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double* dst = out.data() + r * n;
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double s = a(r, k);
      auto src = b.row(k);
      for (std::size_t c = 0; c < n; ++c) dst[c] += s * src[c];
    }
  }
  return NonnegMatrix::unchecked(a.rows(), n, std::move(out));
}

NonnegMatrix multiply_abt(const NonnegMatrix& a, const NonnegMatrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("multiply_abt: " + shape_str(a) + " * (" + shape_str(b) + ")^T");
  }
  std::vector<double> out(a.rows() * b.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto ar = a.row(r);
    for (std::size_t c = 0; c < b.rows(); ++c) {
      auto br = b.row(c);
      double acc = 0.0;
      for (std::size_t k = 0; k < ar.size(); ++k) acc += ar[k] * br[k];
      out[r * b.rows() + c] = acc;
    }
  }
  return NonnegMatrix::unchecked(a.rows(), b.rows(), std::move(out));
}

NonnegMatrix multiply_atb(const NonnegMatrix& a, const NonnegMatrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("multiply_atb: (" + shape_str(a) + ")^T * " + shape_str(b));
  }
  const std::size_t n = b.cols();
  std::vector<double> out(a.cols() * n, 0.0);
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto ak = a.row(k);
    auto bk = b.row(k);
    for (std::size_t r = 0; r < a.cols(); ++r) {
      const double s = ak[r];
      double* dst = out.data() + r * n;
      for (std::size_t c = 0; c < n; ++c) dst[c] += s * bk[c];
    }
  }
  return NonnegMatrix::unchecked(a.cols(), n, std::move(out));
}

double sum(const NonnegMatrix& a) noexcept {
  double acc = 0.0;
  for (double v : a.values()) acc += v;
  return acc;
}

double max_relative_difference(const NonnegMatrix& a, const NonnegMatrix& b, double floor) {
  require_same_shape(a, b, "max_relative_difference");
  double worst = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    if (std::isnan(av[i]) || std::isnan(bv[i])) return HUGE_VAL;
    const double scale_ = std::max({std::abs(av[i]), std::abs(bv[i]), floor});
    worst = std::max(worst, std::abs(av[i] - bv[i]) / scale_);
  }
  return worst;
}

}  // namespace betacnmf
