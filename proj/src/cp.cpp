#include "mrlr/cp.hpp"

#include <numeric>

namespace mrlr {

void FactorSet::validate() const {
  if (factors.empty()) throw validation_error("factor set is empty");
  if (rank < 1) throw validation_error("rank must be >= 1");
  for (const Matrix& f : factors) {
    if (f.cols() != rank)
      throw validation_error("factors must share the same column count");
    if (!f.allFinite())
      throw validation_error("factor contains non-finite entries");
  }
}

Index FactorSet::entry_count() const {
  Index n = 0;
  for (const Matrix& f : factors) n += f.size();
  return n;
}

FactorSet FactorSet::zero(const Shape& shape, Index rank) {
  FactorSet F;
  F.rank = rank;
  F.factors.reserve(shape.size());
  for (Index n : shape) F.factors.push_back(Matrix::Zero(n, rank));
  return F;
}

Matrix khatri_rao(const Matrix& A, const Matrix& B) {
  if (A.cols() != B.cols())
    throw validation_error("khatri_rao: column counts differ");
  const Index ia = A.rows(), ib = B.rows(), r = A.cols();
  Matrix K(ia * ib, r);
  for (Index c = 0; c < r; ++c)
    for (Index i = 0; i < ia; ++i)
      K.col(c).segment(i * ib, ib) = A(i, c) * B.col(c);
  return K;
}

Matrix khatri_rao_chain(const FactorSet& F, std::span<const int> modes) {
  if (modes.empty()) return Matrix::Ones(1, F.rank);
  Matrix K = F.factors[static_cast<std::size_t>(modes[0] - 1)];
  for (std::size_t j = 1; j < modes.size(); ++j)
    K = khatri_rao(F.factors[static_cast<std::size_t>(modes[j] - 1)], K);
  return K;
}

Matrix khatri_rao_skip(const FactorSet& F, int p) {
  std::vector<int> modes;
  modes.reserve(static_cast<std::size_t>(F.order()));
  for (int m = 1; m <= F.order(); ++m)
    if (m != p) modes.push_back(m);
  return khatri_rao_chain(F, modes);
}

static void check_factor_shape(const FactorSet& F, const Shape& shape) {
  if (F.order() != static_cast<Index>(shape.size()))
    throw validation_error("factor count does not match tensor order");
  for (std::size_t i = 0; i < shape.size(); ++i)
    if (F.factors[i].rows() != shape[i])
      throw validation_error("factor row count does not match mode size");
}

void cp_accumulate(const FactorSet& F, double alpha, std::span<double> out) {
  const Index I = F.order();
  const Index R = F.rank;
  Eigen::Map<Eigen::VectorXd> acc(out.data(), static_cast<Index>(out.size()));

  std::vector<double> cur, next;
  for (Index r = 0; r < R; ++r) {
    if (I == 1) {
      acc += alpha * F.factors[0].col(r);
      continue;
    }
    // Expand kron(F_{I-1}.col(r), ..., F_1.col(r)) with mode 1 fastest,
    // then fold the last mode's expansion straight into the accumulator.
    cur.assign(F.factors[0].col(r).data(),
               F.factors[0].col(r).data() + F.factors[0].rows());
    for (Index m = 1; m + 1 < I; ++m) {
      const auto& f = F.factors[static_cast<std::size_t>(m)];
      const Index len = static_cast<Index>(cur.size());
      next.resize(static_cast<std::size_t>(len * f.rows()));
      Eigen::Map<const Eigen::VectorXd> v(cur.data(), len);
      for (Index n = 0; n < f.rows(); ++n)
        Eigen::Map<Eigen::VectorXd>(next.data() + n * len, len) = f(n, r) * v;
      cur.swap(next);
    }
    const auto& last = F.factors[static_cast<std::size_t>(I - 1)];
    const Index len = static_cast<Index>(cur.size());
    Eigen::Map<const Eigen::VectorXd> v(cur.data(), len);
    for (Index n = 0; n < last.rows(); ++n)
      acc.segment(n * len, len) += (alpha * last(n, r)) * v;
  }
}

DenseTensor cp_reconstruct(const FactorSet& F, const Shape& shape) {
  F.validate();
  check_factor_shape(F, shape);
  DenseTensor X(shape);
  cp_accumulate(F, 1.0, X.data());
  return X;
}

Matrix cp_mat_form(const FactorSet& F, int p) {
  F.validate();
  if (p < 1 || p > F.order())
    throw validation_error("cp_mat_form: mode out of range");
  return khatri_rao_skip(F, p) *
         F.factors[static_cast<std::size_t>(p - 1)].transpose();
}

FactorSet cp_reshape_factors(const FactorSet& F, const ModePartition& P) {
  F.validate();
  P.validate(F.order());
  FactorSet out;
  out.rank = F.rank;
  out.factors.reserve(P.groups.size());
  for (const auto& g : P.groups) out.factors.push_back(khatri_rao_chain(F, g));
  return out;
}

Matrix mttkrp(const DenseTensor& X, const FactorSet& F, int p) {
  const Index I = X.order();
  if (p < 1 || p > I) throw validation_error("mttkrp: mode out of range");
  check_factor_shape(F, X.shape());
  const Shape& N = X.shape();
  const Index R = F.rank;
  const Index total = X.size();

  if (I == 1) return Eigen::Map<const Eigen::VectorXd>(X.data().data(), total)
                         .replicate(1, R);

  Matrix W;
  Index remaining;  // product of the not-yet-contracted mode sizes
  int lo, hi;       // contiguous 1-based range of remaining modes

  if (p < I) {
    // Batched contraction of the last mode, then fold in the tail
    // column-by-column: after contracting modes > m, each column is a
    // colex tensor over modes 1..m with mode m slowest.
    const Index nl = N[static_cast<std::size_t>(I - 1)];
    W.noalias() = Eigen::Map<const Matrix>(X.data().data(), total / nl, nl) *
                  F.factors[static_cast<std::size_t>(I - 1)];
    remaining = total / nl;
    lo = 1;
    hi = static_cast<int>(I) - 1;
    for (int m = hi; m > p; --m) {
      const Index nm = N[static_cast<std::size_t>(m - 1)];
      Matrix Wn(remaining / nm, R);
      for (Index r = 0; r < R; ++r)
        Wn.col(r).noalias() =
            Eigen::Map<const Matrix>(W.col(r).data(), remaining / nm, nm) *
            F.factors[static_cast<std::size_t>(m - 1)].col(r);
      W.swap(Wn);
      remaining /= nm;
    }
    hi = p;
  } else {
    // p == I: batched contraction of mode 1 instead.
    const Index n1 = N[0];
    W.noalias() =
        Eigen::Map<const Matrix>(X.data().data(), n1, total / n1).transpose() *
        F.factors[0];
    remaining = total / n1;
    lo = 2;
    hi = static_cast<int>(I);
  }

  // Contract leading modes; the current fastest mode comes off each time.
  for (int m = lo; m < p; ++m) {
    const Index nm = N[static_cast<std::size_t>(m - 1)];
    Matrix Wn(remaining / nm, R);
    for (Index r = 0; r < R; ++r)
      Wn.col(r).noalias() =
          Eigen::Map<const Matrix>(W.col(r).data(), nm, remaining / nm)
              .transpose() *
          F.factors[static_cast<std::size_t>(m - 1)].col(r);
    W.swap(Wn);
    remaining /= nm;
  }
  return W;
}

}  // namespace mrlr
