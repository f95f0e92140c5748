#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mrlr {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Shape = std::vector<Index>;

/// Invalid shapes, partitions, ranks, or dimension mismatches.
class validation_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: non-finite input, zero-norm reference, and the like.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Product of mode sizes, with overflow and positivity checks.
Index shape_product(const Shape& shape);

/// Dense real tensor of order >= 1. Entries are stored in one flat buffer
/// in colexicographic order: the mode-1 index varies fastest, the last mode
/// slowest. For order 2 this is ordinary column-major layout, so any prefix
/// or suffix of modes can be viewed as a matrix without moving data.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(Shape shape);
  DenseTensor(Shape shape, std::vector<double> data);

  Index order() const { return static_cast<Index>(shape_.size()); }
  const Shape& shape() const { return shape_; }
  /// Size of mode p, 1-based.
  Index dim(int p) const;
  Index size() const { return static_cast<Index>(data_.size()); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double operator[](Index i) const { return data_[i]; }
  double& operator[](Index i) { return data_[i]; }

  /// Entry at a 0-based multi-index (one index per mode).
  double at(std::span<const Index> idx) const;
  double& at(std::span<const Index> idx);

  double frobenius_norm() const;
  bool all_finite() const;

  bool operator==(const DenseTensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Colexicographic strides: stride[0] = 1, stride[m] = N_1*...*N_m.
std::vector<Index> colex_strides(const Shape& shape);

/// Ordered partition of the mode set {1..I}: a list of disjoint, non-empty,
/// ordered groups of 1-based mode indices whose union is {1..I}. The order
/// of modes inside a group fixes the index map of ten_reshape.
struct ModePartition {
  std::vector<std::vector<int>> groups;

  Index group_count() const { return static_cast<Index>(groups.size()); }

  /// Throws validation_error unless this is a valid partition of {1..I}.
  void validate(Index order) const;

  /// Mode sizes of the reshaped tensor: entry p is the product of the
  /// original sizes of the modes in group p.
  Shape reshaped_shape(const Shape& original) const;

  /// {{1},{2},...,{I}}: reshaping with it is the identity.
  static ModePartition identity(Index order);
  /// {{1,2,...,I}}: reshaping with it is vectorization.
  static ModePartition single_group(Index order);

  bool operator==(const ModePartition& other) const = default;
};

/// Unfold into a (prod_{i != p} N_i) x N_p matrix: columns hold mode p,
/// rows enumerate the remaining modes colexicographically (lowest mode
/// fastest). p is 1-based.
Matrix mat_unfold(const DenseTensor& X, int p);

/// Inverse of mat_unfold for the given original shape.
DenseTensor mat_fold(const Matrix& M, const Shape& shape, int p);

/// Reshape into an order-|P| tensor by merging the modes of each group.
/// Within group p the merged index is colexicographic over the group's
/// modes in their listed order. P = identity gives X back, P = single
/// group gives vec(X).
DenseTensor ten_reshape(const DenseTensor& X, const ModePartition& P);

/// Inverse of ten_reshape: recovers the order-I tensor of shape
/// `original_shape` from Y = ten_reshape(X, P).
DenseTensor unten_reshape(const DenseTensor& Y, const ModePartition& P,
                          const Shape& original_shape);

}  // namespace mrlr
