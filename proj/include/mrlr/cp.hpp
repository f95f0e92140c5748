#pragma once

#include <vector>

#include "mrlr/tensor.hpp"

namespace mrlr {

/// CP factors: one matrix per mode, mode i factor is N_i x R. A rank-R CP
/// model is the sum over r of the outer products of the r-th columns.
struct FactorSet {
  std::vector<Matrix> factors;
  Index rank = 0;

  Index order() const { return static_cast<Index>(factors.size()); }

  /// Throws validation_error unless all factors share `rank` columns and
  /// every entry is finite.
  void validate() const;

  /// Total number of stored scalars.
  Index entry_count() const;

  /// Zero factors for the given shape.
  static FactorSet zero(const Shape& shape, Index rank);
};

/// Column-wise Kronecker product of A (I_A x R) and B (I_B x R): column r is
/// kron(A_r, B_r) with B's row index varying fastest. With this convention
/// F_I (.) ... (.) F_1 enumerates rows with the mode-1 index fastest, which
/// matches the colexicographic tensor layout.
Matrix khatri_rao(const Matrix& A, const Matrix& B);

/// F_I (.) ... (.) F_1 over `modes` (1-based positions into factors, given
/// fastest-varying first). An empty list yields the 1 x rank all-ones matrix.
Matrix khatri_rao_chain(const FactorSet& F, std::span<const int> modes);

/// Khatri-Rao chain over every mode except p (p = 0 keeps all modes).
Matrix khatri_rao_skip(const FactorSet& F, int p);

/// Sum of rank-1 outer products defined by F, for any order >= 1.
DenseTensor cp_reconstruct(const FactorSet& F, const Shape& shape);

/// Adds alpha times the CP reconstruction of F to `out` (flat colex buffer).
void cp_accumulate(const FactorSet& F, double alpha, std::span<double> out);

/// Mode-p unfolding of the CP model, computed in factored form:
/// (F_I (.) ... (.) F_{p+1} (.) F_{p-1} (.) ... (.) F_1) * F_p^T.
Matrix cp_mat_form(const FactorSet& F, int p);

/// Factors of the partition-reshaped CP model: group p's factor is the
/// Khatri-Rao chain of the group's factors, so reshaping a rank-R CP model
/// yields a CP model of the reshaped tensor with rank at most R.
FactorSet cp_reshape_factors(const FactorSet& F, const ModePartition& P);

/// Matricized-tensor-times-Khatri-Rao product: N_p x R matrix equal to
/// mat_unfold(X, p)^T * khatri_rao_skip(F, p), computed as a chain of
/// mode contractions without materializing the Khatri-Rao matrix.
Matrix mttkrp(const DenseTensor& X, const FactorSet& F, int p);

}  // namespace mrlr
