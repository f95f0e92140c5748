#pragma once

#include <cstdint>
#include <utility>

#include "mrlr/cp.hpp"
#include "mrlr/tensor.hpp"

namespace mrlr {

struct AlsConfig {
  int max_sweeps = 200;
  /// Stop once |err_prev - err| <= rel_tol * ||X||_F.
  double rel_tol = 1e-8;
  std::uint64_t seed = 0;
  /// Independent random restarts; the best final fit is kept. Restart k
  /// draws its factors with seed + k.
  int restarts = 1;

  void validate() const;
};

struct AlsTrace {
  /// Frobenius fit error ||X - Xhat||_F after each completed sweep.
  std::vector<double> errors;
  int sweeps_run = 0;
  bool converged = false;
  /// Number of least-squares solves that hit the pseudo-inverse fallback.
  int gram_fallbacks = 0;
};

/// Factors filled with i.i.d. standard normal draws; deterministic in seed.
FactorSet init_factors(const Shape& shape, Index rank, std::uint64_t seed);

/// Least-squares solve of H * G ~= C given the Gram matrix G = K^T K and
/// C = Xhat^T K. Uses a Cholesky solve when G is positive definite to
/// working precision, otherwise an eigenvalue-thresholded pseudo-inverse
/// (threshold 1e-12 x largest eigenvalue), counting the event in `trace`.
Matrix gram_solve(const Matrix& G, const Matrix& C, AlsTrace* trace = nullptr);

/// Minimizer H of ||Xhat_p - K * H^T||_F via the Gram system.
Matrix ls_update(const Matrix& Xhat_p, const Matrix& K,
                 AlsTrace* trace = nullptr);

/// Rank-R CP fit by alternating least squares. Within each sweep the factors
/// are updated in mode order; the Gram of the Khatri-Rao system is assembled
/// as the Hadamard product of the per-factor Grams and the right-hand side
/// via mttkrp, so the Khatri-Rao matrix itself is never formed. Runs
/// cfg.restarts independent starts and returns the best.
std::pair<FactorSet, AlsTrace> als_fit(const DenseTensor& X, Index rank,
                                       const AlsConfig& cfg);

/// Single ALS run warm-started from `init` (no restarts, no random draws).
std::pair<FactorSet, AlsTrace> als_fit_warm(const DenseTensor& X,
                                            const FactorSet& init,
                                            const AlsConfig& cfg);

}  // namespace mrlr
