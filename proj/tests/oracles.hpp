// Brute-force reference implementations used as test oracles. Everything
// here works entry-by-entry from the index-map definitions and stays
// independent of the library's incremental-stride code paths.
#pragma once

#include <numeric>
#include <random>
#include <vector>

#include "mrlr/cp.hpp"
#include "mrlr/tensor.hpp"

namespace oracle {

using mrlr::DenseTensor;
using mrlr::FactorSet;
using mrlr::Index;
using mrlr::Matrix;
using mrlr::ModePartition;
using mrlr::Shape;

// Next colexicographic multi-index (0-based); false once exhausted.
inline bool advance(std::vector<Index>& idx, const Shape& shape) {
  for (std::size_t m = 0; m < shape.size(); ++m) {
    if (++idx[m] < shape[m]) return true;
    idx[m] = 0;
  }
  return false;
}

// Row index of the non-p modes, counted colexicographically, straight from
// the unfolding definition.
inline Matrix mat_unfold(const DenseTensor& X, int p) {
  const Shape& N = X.shape();
  Index rows = 1;
  for (std::size_t i = 0; i < N.size(); ++i)
    if (static_cast<int>(i + 1) != p) rows *= N[i];
  Matrix M(rows, N[static_cast<std::size_t>(p - 1)]);
  std::vector<Index> idx(N.size(), 0);
  Index linear = 0;
  do {
    Index k = 0, stride = 1;
    for (std::size_t i = 0; i < N.size(); ++i) {
      if (static_cast<int>(i + 1) == p) continue;
      k += idx[i] * stride;
      stride *= N[i];
    }
    M(k, idx[static_cast<std::size_t>(p - 1)]) = X[linear++];
  } while (advance(idx, N));
  return M;
}

// Direct evaluation of the multi-group index map.
inline DenseTensor ten_reshape(const DenseTensor& X, const ModePartition& P) {
  const Shape& N = X.shape();
  DenseTensor Y(P.reshaped_shape(N));
  const auto out_strides = mrlr::colex_strides(Y.shape());
  std::vector<Index> idx(N.size(), 0);
  Index linear = 0;
  do {
    Index off = 0;
    for (std::size_t p = 0; p < P.groups.size(); ++p) {
      Index k = 0, stride = 1;
      for (int mode : P.groups[p]) {
        k += idx[static_cast<std::size_t>(mode - 1)] * stride;
        stride *= N[static_cast<std::size_t>(mode - 1)];
      }
      off += k * out_strides[p];
    }
    Y[off] = X[linear++];
  } while (advance(idx, N));
  return Y;
}

// Sum of outer products, one scalar product per entry and rank.
inline DenseTensor cp_reconstruct(const FactorSet& F, const Shape& shape) {
  DenseTensor X(shape);
  std::vector<Index> idx(shape.size(), 0);
  Index linear = 0;
  do {
    double sum = 0.0;
    for (Index r = 0; r < F.rank; ++r) {
      double prod = 1.0;
      for (std::size_t i = 0; i < shape.size(); ++i)
        prod *= F.factors[i](idx[i], r);
      sum += prod;
    }
    X[linear++] = sum;
  } while (advance(idx, shape));
  return X;
}

// Column-wise Kronecker product from its definition.
inline Matrix khatri_rao(const Matrix& A, const Matrix& B) {
  Matrix K(A.rows() * B.rows(), A.cols());
  for (Index c = 0; c < A.cols(); ++c)
    for (Index i = 0; i < A.rows(); ++i)
      for (Index j = 0; j < B.rows(); ++j)
        K(i * B.rows() + j, c) = A(i, c) * B(j, c);
  return K;
}

inline DenseTensor random_tensor(const Shape& shape, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  DenseTensor X(shape);
  for (double& v : X.data()) v = normal(gen);
  return X;
}

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Matrix M(rows, cols);
  for (Index i = 0; i < M.size(); ++i) M.data()[i] = normal(gen);
  return M;
}

inline FactorSet random_factors(const Shape& shape, Index rank,
                                std::uint64_t seed) {
  FactorSet F;
  F.rank = rank;
  for (std::size_t i = 0; i < shape.size(); ++i)
    F.factors.push_back(random_matrix(shape[i], rank, seed + i));
  return F;
}

// Every ordered partition with ordered groups, as (permutation, composition)
// splits of the mode sequence.
inline std::vector<ModePartition> all_ordered_partitions(int order) {
  std::vector<int> perm(static_cast<std::size_t>(order));
  std::iota(perm.begin(), perm.end(), 1);
  std::vector<ModePartition> out;
  do {
    for (int mask = 0; mask < (1 << (order - 1)); ++mask) {
      ModePartition P;
      P.groups.emplace_back();
      for (int i = 0; i < order; ++i) {
        P.groups.back().push_back(perm[static_cast<std::size_t>(i)]);
        if (i + 1 < order && (mask >> i) & 1) P.groups.emplace_back();
      }
      out.push_back(std::move(P));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

template <typename A, typename B>
bool exact_eq(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

inline double rel_err(const Matrix& A, const Matrix& B) {
  const double denom = B.norm();
  return denom == 0.0 ? (A - B).norm() : (A - B).norm() / denom;
}

inline double rel_err(const DenseTensor& A, const DenseTensor& B) {
  double diff = 0.0, denom = 0.0;
  for (Index i = 0; i < A.size(); ++i) {
    diff += (A[i] - B[i]) * (A[i] - B[i]);
    denom += B[i] * B[i];
  }
  return denom == 0.0 ? std::sqrt(diff) : std::sqrt(diff / denom);
}

}  // namespace oracle
