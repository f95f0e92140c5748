#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mrlr/als.hpp"
#include "mrlr/cp.hpp"
#include "mrlr/tensor.hpp"

namespace mrlr {

/// Fit order of the stages in a PartitionPlan. The list order is always the
/// fit order; `coarse_to_fine` additionally asserts that group counts are
/// non-decreasing along the list.
enum class StageOrdering { coarse_to_fine, as_given };

struct PlanStage {
  ModePartition partition;
  Index rank = 1;
};

/// Ordered list of (partition, rank) stages over a common tensor order.
struct PartitionPlan {
  std::vector<PlanStage> stages;
  StageOrdering ordering = StageOrdering::coarse_to_fine;

  void validate(Index order) const;
};

/// One fitted component: its partition, the CP factors of the reshaped
/// component, and the ALS trace that produced them.
struct MrlrStage {
  ModePartition partition;
  FactorSet factors;
  AlsTrace trace;
};

/// Multi-resolution model: the sum over stages of the un-reshaped CP
/// reconstructions approximates the original tensor.
struct MrlrModel {
  Shape shape;
  std::vector<MrlrStage> stages;
};

struct FitReport {
  /// Normalized Frobenius error after each stage is added.
  std::vector<double> stage_nfe;
  std::vector<Index> stage_params;
  std::vector<Index> cumulative_params;
  std::vector<int> stage_sweeps;
  std::vector<double> stage_seconds;
  std::uint64_t seed = 0;
};

/// The I-1 regular partitions of {1..I}: partition l has l+1 contiguous
/// groups of near-equal size, group n covering floor((n-1)I/(l+1))+1
/// through floor(nI/(l+1)). Listed coarse to fine.
std::vector<ModePartition> regular_partitions(Index order);

/// Fits the plan's stages sequentially: stage i is a rank-R_i CP fit of the
/// partition-reshaped residual left by stages 1..i-1. Residuals whose norm
/// falls below 1e-14 * ||X||_F short-circuit the remaining stages to zero
/// factors. `refinement_cycles` extra passes re-fit each stage against the
/// residual of all the others, warm-started from its current factors.
std::pair<MrlrModel, FitReport> mrlr_fit(const DenseTensor& X,
                                         const PartitionPlan& plan,
                                         const AlsConfig& cfg,
                                         int refinement_cycles = 0);

/// Sum over stages of unten_reshape(cp_reconstruct(stage factors)).
DenseTensor mrlr_reconstruct(const MrlrModel& model);

/// Scalars stored in the model's factor sets (exact integer count).
Index param_count(const MrlrModel& model);

/// Parameter count a plan would use on a tensor of the given shape:
/// sum over stages of R_l * (sum over groups of the group's merged size).
Index param_count(const PartitionPlan& plan, const Shape& shape);

/// Closed-form parameter estimate for the regular partitions on an
/// order-I tensor with common mode size eta:
/// sum_{l=1..I-1} R_l * (l+1) * eta^(I/(l+1)).
double estimate_params_regular(double eta, Index order,
                               std::span<const Index> ranks);

}  // namespace mrlr
