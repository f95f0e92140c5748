#pragma once

#include <array>
#include <string>
#include <vector>

#include "mrlr/mrlr.hpp"
#include "mrlr/tensor.hpp"

namespace mrlr {

struct GridAxis {
  double start = 0.0;
  double step = 1.0;
  Index count = 1;
};

/// Three-axis sampling grid for the built-in benchmark function.
struct GridSpec {
  std::array<GridAxis, 3> axes;

  static GridSpec uniform(double start, double step, Index count);
  void validate() const;
};

/// Normalized Frobenius error ||X - Xhat||_F / ||X||_F.
double nfe(const DenseTensor& X, const DenseTensor& Xhat);

/// Samples f(x1, x2, x3) = (x1^2 + x2^2) * exp(-|x2 + x3|) on the grid;
/// entry (i, j, k) uses the i-th, j-th, k-th points of the three axes.
DenseTensor sample_function_tensor(const GridSpec& grid);

/// One fitted configuration in a parameter-budget sweep.
struct SweepRow {
  std::string method;
  std::vector<Index> stage_ranks;
  Index params = 0;
  double nfe = 0.0;
  int sweeps = 0;
  double seconds = 0.0;
  std::uint64_t seed = 0;
};

/// Sweeps the last stage's rank over `sweep_ranks` (earlier stage ranks are
/// fixed from base_plan), one MRLR fit per value. With `baseline` set, also
/// fits plain CP (single identity-partition stage) at ranks whose parameter
/// counts interleave and bracket the MRLR budgets. Each point derives its
/// seed from (cfg.seed, rank), so the rows do not depend on execution order.
/// Rows are sorted by (method, params).
std::vector<SweepRow> rank_sweep(const DenseTensor& X,
                                 const PartitionPlan& base_plan,
                                 const std::vector<Index>& sweep_ranks,
                                 bool baseline, const AlsConfig& cfg);

}  // namespace mrlr
