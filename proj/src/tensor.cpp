#include "mrlr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mrlr {

Index shape_product(const Shape& shape) {
  if (shape.empty()) throw validation_error("tensor order must be >= 1");
  Index prod = 1;
  for (Index n : shape) {
    if (n < 1) throw validation_error("mode sizes must be >= 1");
    if (prod > std::numeric_limits<Index>::max() / n)
      throw validation_error("shape product overflows Index");
    prod *= n;
  }
  return prod;
}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
  data_.assign(static_cast<std::size_t>(shape_product(shape_)), 0.0);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (static_cast<Index>(data_.size()) != shape_product(shape_))
    throw validation_error("data length does not match shape product");
}

Index DenseTensor::dim(int p) const {
  if (p < 1 || p > order()) throw validation_error("mode index out of range");
  return shape_[static_cast<std::size_t>(p - 1)];
}

double DenseTensor::at(std::span<const Index> idx) const {
  return data_[static_cast<std::size_t>(
      std::inner_product(idx.begin(), idx.end(), colex_strides(shape_).begin(),
                         Index{0}))];
}

double& DenseTensor::at(std::span<const Index> idx) {
  return data_[static_cast<std::size_t>(
      std::inner_product(idx.begin(), idx.end(), colex_strides(shape_).begin(),
                         Index{0}))];
}

double DenseTensor::frobenius_norm() const {
  return Eigen::Map<const Eigen::VectorXd>(data_.data(),
                                           static_cast<Index>(data_.size()))
      .norm();
}

bool DenseTensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

std::vector<Index> colex_strides(const Shape& shape) {
  std::vector<Index> strides(shape.size());
  Index acc = 1;
  for (std::size_t m = 0; m < shape.size(); ++m) {
    strides[m] = acc;
    acc *= shape[m];
  }
  return strides;
}

void ModePartition::validate(Index order) const {
  if (order < 1) throw validation_error("tensor order must be >= 1");
  if (groups.empty()) throw validation_error("partition has no groups");
  std::vector<char> seen(static_cast<std::size_t>(order), 0);
  Index covered = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw validation_error("partition group is empty");
    for (int mode : g) {
      if (mode < 1 || mode > order)
        throw validation_error("partition mode index " + std::to_string(mode) +
                               " out of range 1.." + std::to_string(order));
      if (seen[static_cast<std::size_t>(mode - 1)])
        throw validation_error("partition repeats mode " +
                               std::to_string(mode));
      seen[static_cast<std::size_t>(mode - 1)] = 1;
      ++covered;
    }
  }
  if (covered != order)
    throw validation_error("partition does not cover all modes");
}

Shape ModePartition::reshaped_shape(const Shape& original) const {
  Shape out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    Index n = 1;
    for (int mode : g) n *= original[static_cast<std::size_t>(mode - 1)];
    out.push_back(n);
  }
  return out;
}

ModePartition ModePartition::identity(Index order) {
  ModePartition P;
  P.groups.reserve(static_cast<std::size_t>(order));
  for (int m = 1; m <= order; ++m) P.groups.push_back({m});
  return P;
}

ModePartition ModePartition::single_group(Index order) {
  ModePartition P;
  P.groups.emplace_back();
  for (int m = 1; m <= order; ++m) P.groups.back().push_back(m);
  return P;
}

namespace {

// Destination stride of each original mode under a partition reshape:
// inside its group a mode steps by the product of the sizes of the group
// modes listed before it; the whole group steps by the product of the
// reshaped sizes of the groups before it.
std::vector<Index> reshape_strides(const Shape& shape,
                                   const ModePartition& P) {
  std::vector<Index> w(shape.size(), 0);
  Index group_stride = 1;
  for (const auto& g : P.groups) {
    Index within = 1;
    for (int mode : g) {
      w[static_cast<std::size_t>(mode - 1)] = within * group_stride;
      within *= shape[static_cast<std::size_t>(mode - 1)];
    }
    group_stride *= within;
  }
  return w;
}

// Walks the colexicographic multi-index of `shape` once; `step(delta)` gets
// the change of a linear offset whose per-mode strides are `w`.
template <typename F>
void for_each_offset_delta(const Shape& shape, const std::vector<Index>& w,
                           F&& step) {
  const std::size_t order = shape.size();
  // deltas[m]: offset change when digit m increments and all lower reset.
  std::vector<Index> deltas(order);
  for (std::size_t m = 0; m < order; ++m) {
    Index back = 0;
    for (std::size_t j = 0; j < m; ++j) back += (shape[j] - 1) * w[j];
    deltas[m] = w[m] - back;
  }
  std::vector<Index> idx(order, 0);
  const Index total = shape_product(shape);
  Index off = 0;
  for (Index count = 0;;) {
    step(off);
    if (++count == total) break;
    std::size_t m = 0;
    while (idx[m] + 1 == shape[m]) {
      idx[m] = 0;
      ++m;
    }
    ++idx[m];
    off += deltas[m];
  }
}

}  // namespace

Matrix mat_unfold(const DenseTensor& X, int p) {
  const Index I = X.order();
  if (p < 1 || p > I) throw validation_error("mat_unfold: mode out of range");
  const Shape& N = X.shape();
  Index left = 1, right = 1;
  for (int i = 1; i < p; ++i) left *= N[static_cast<std::size_t>(i - 1)];
  for (Index i = p + 1; i <= I; ++i) right *= N[static_cast<std::size_t>(i - 1)];
  const Index np = N[static_cast<std::size_t>(p - 1)];

  Matrix M(left * right, np);
  const double* src = X.data().data();
  // The buffer factors as left x np x right; rows of M enumerate (left,
  // right) with left fastest, so each (n, q) pair is one contiguous run.
  for (Index q = 0; q < right; ++q)
    for (Index n = 0; n < np; ++n)
      std::copy_n(src + (n + q * np) * left, left, M.col(n).data() + q * left);
  return M;
}

DenseTensor mat_fold(const Matrix& M, const Shape& shape, int p) {
  const Index I = static_cast<Index>(shape.size());
  if (p < 1 || p > I) throw validation_error("mat_fold: mode out of range");
  Index left = 1, right = 1;
  for (int i = 1; i < p; ++i) left *= shape[static_cast<std::size_t>(i - 1)];
  for (Index i = p + 1; i <= I; ++i)
    right *= shape[static_cast<std::size_t>(i - 1)];
  const Index np = shape[static_cast<std::size_t>(p - 1)];
  if (M.rows() != left * right || M.cols() != np)
    throw validation_error("mat_fold: matrix dimensions do not match shape");

  DenseTensor X(shape);
  double* dst = X.data().data();
  for (Index q = 0; q < right; ++q)
    for (Index n = 0; n < np; ++n)
      std::copy_n(M.col(n).data() + q * left, left, dst + (n + q * np) * left);
  return X;
}

DenseTensor ten_reshape(const DenseTensor& X, const ModePartition& P) {
  P.validate(X.order());
  DenseTensor Y(P.reshaped_shape(X.shape()));
  const std::vector<Index> w = reshape_strides(X.shape(), P);
  const double* src = X.data().data();
  double* dst = Y.data().data();
  Index linear = 0;
  for_each_offset_delta(X.shape(), w,
                        [&](Index off) { dst[off] = src[linear++]; });
  return Y;
}

DenseTensor unten_reshape(const DenseTensor& Y, const ModePartition& P,
                          const Shape& original_shape) {
  P.validate(static_cast<Index>(original_shape.size()));
  const Shape expected = P.reshaped_shape(original_shape);
  if (Y.shape() != expected)
    throw validation_error(
        "unten_reshape: input shape does not match partition of the original "
        "shape");
  DenseTensor X(original_shape);
  const std::vector<Index> w = reshape_strides(original_shape, P);
  const double* src = Y.data().data();
  double* dst = X.data().data();
  Index linear = 0;
  for_each_offset_delta(original_shape, w,
                        [&](Index off) { dst[linear++] = src[off]; });
  return X;
}

}  // namespace mrlr
