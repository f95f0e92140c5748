#include "mrlr/mrlr.hpp"

#include <chrono>
#include <cmath>

namespace mrlr {

namespace {

constexpr double kDegenerateResidual = 1e-14;
constexpr std::uint64_t kStageSeedStride = 1000003;

// Stage contribution mapped back to the original tensor space.
DenseTensor stage_tensor(const MrlrStage& stage, const Shape& shape) {
  DenseTensor Z(stage.partition.reshaped_shape(shape));
  cp_accumulate(stage.factors, 1.0, Z.data());
  return unten_reshape(Z, stage.partition, shape);
}

bool all_zero(const FactorSet& F) {
  for (const Matrix& f : F.factors)
    if (!f.isZero(0.0)) return false;
  return true;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

void PartitionPlan::validate(Index order) const {
  if (stages.empty()) throw validation_error("plan has no stages");
  Index prev_groups = 0;
  for (const PlanStage& st : stages) {
    st.partition.validate(order);
    if (st.rank < 1) throw validation_error("stage rank must be >= 1");
    if (ordering == StageOrdering::coarse_to_fine) {
      if (st.partition.group_count() < prev_groups)
        throw validation_error(
            "coarse-to-fine plan requires non-decreasing group counts");
      prev_groups = st.partition.group_count();
    }
  }
}

std::vector<ModePartition> regular_partitions(Index order) {
  if (order < 2) throw validation_error("regular partitions need order >= 2");
  std::vector<ModePartition> out;
  out.reserve(static_cast<std::size_t>(order - 1));
  for (Index l = 1; l < order; ++l) {
    ModePartition P;
    for (Index n = 1; n <= l + 1; ++n) {
      const Index first = (n - 1) * order / (l + 1) + 1;
      const Index last = n * order / (l + 1);
      std::vector<int> group;
      for (Index m = first; m <= last; ++m) group.push_back(static_cast<int>(m));
      P.groups.push_back(std::move(group));
    }
    P.validate(order);
    out.push_back(std::move(P));
  }
  return out;
}

std::pair<MrlrModel, FitReport> mrlr_fit(const DenseTensor& X,
                                         const PartitionPlan& plan,
                                         const AlsConfig& cfg,
                                         int refinement_cycles) {
  plan.validate(X.order());
  cfg.validate();
  if (refinement_cycles < 0)
    throw validation_error("refinement_cycles must be >= 0");
  if (!X.all_finite()) throw numeric_error("mrlr_fit: non-finite tensor entry");
  const double xnorm = X.frobenius_norm();
  if (xnorm == 0.0) throw numeric_error("mrlr_fit: zero-norm tensor");

  MrlrModel model;
  model.shape = X.shape();
  FitReport report;
  report.seed = cfg.seed;

  DenseTensor residual = X;
  Index cumulative = 0;
  for (std::size_t i = 0; i < plan.stages.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const PlanStage& st = plan.stages[i];
    const Shape reshaped = st.partition.reshaped_shape(X.shape());

    MrlrStage stage;
    stage.partition = st.partition;
    if (residual.frobenius_norm() <= kDegenerateResidual * xnorm) {
      stage.factors = FactorSet::zero(reshaped, st.rank);
      stage.trace.errors = {residual.frobenius_norm()};
      stage.trace.converged = true;
    } else {
      AlsConfig stage_cfg = cfg;
      stage_cfg.seed = cfg.seed + kStageSeedStride * static_cast<std::uint64_t>(i);
      auto [factors, trace] =
          als_fit(ten_reshape(residual, st.partition), st.rank, stage_cfg);
      stage.factors = std::move(factors);
      stage.trace = std::move(trace);
    }
    model.stages.push_back(std::move(stage));

    const MrlrStage& fitted = model.stages.back();
    if (!all_zero(fitted.factors)) {
      DenseTensor Z = stage_tensor(fitted, X.shape());
      Eigen::Map<Eigen::VectorXd>(residual.data().data(), residual.size()) -=
          Eigen::Map<const Eigen::VectorXd>(Z.data().data(), Z.size());
    }

    const Index params = fitted.factors.entry_count();
    cumulative += params;
    report.stage_nfe.push_back(residual.frobenius_norm() / xnorm);
    report.stage_params.push_back(params);
    report.cumulative_params.push_back(cumulative);
    report.stage_sweeps.push_back(fitted.trace.sweeps_run);
    report.stage_seconds.push_back(seconds_since(t0));
  }

  for (int cycle = 0; cycle < refinement_cycles; ++cycle) {
    for (std::size_t i = 0; i < model.stages.size(); ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      MrlrStage& stage = model.stages[i];
      if (!all_zero(stage.factors)) {
        DenseTensor Z = stage_tensor(stage, X.shape());
        Eigen::Map<Eigen::VectorXd>(residual.data().data(), residual.size()) +=
            Eigen::Map<const Eigen::VectorXd>(Z.data().data(), Z.size());
      }
      if (residual.frobenius_norm() > kDegenerateResidual * xnorm) {
        const DenseTensor Y = ten_reshape(residual, stage.partition);
        AlsConfig stage_cfg = cfg;
        stage_cfg.seed =
            cfg.seed + kStageSeedStride * static_cast<std::uint64_t>(i);
        // Zero factors are a fixed point of ALS; fall back to a fresh start.
        auto [factors, trace] =
            all_zero(stage.factors)
                ? als_fit(Y, stage.factors.rank, stage_cfg)
                : als_fit_warm(Y, stage.factors, stage_cfg);
        stage.factors = std::move(factors);
        stage.trace = std::move(trace);
        DenseTensor Z = stage_tensor(stage, X.shape());
        Eigen::Map<Eigen::VectorXd>(residual.data().data(), residual.size()) -=
            Eigen::Map<const Eigen::VectorXd>(Z.data().data(), Z.size());
      } else {
        // The other stages already fit X; this stage contributes nothing.
        stage.factors = FactorSet::zero(
            stage.partition.reshaped_shape(X.shape()), stage.factors.rank);
        stage.trace = AlsTrace{};
        stage.trace.errors = {residual.frobenius_norm()};
        stage.trace.converged = true;
      }
      report.stage_sweeps[i] = stage.trace.sweeps_run;
      report.stage_seconds[i] = seconds_since(t0);
    }
  }
  if (refinement_cycles > 0) {
    // Re-telescope the cumulative errors with the refined factors.
    DenseTensor acc = X;
    for (std::size_t i = 0; i < model.stages.size(); ++i) {
      if (!all_zero(model.stages[i].factors)) {
        DenseTensor Z = stage_tensor(model.stages[i], X.shape());
        Eigen::Map<Eigen::VectorXd>(acc.data().data(), acc.size()) -=
            Eigen::Map<const Eigen::VectorXd>(Z.data().data(), Z.size());
      }
      report.stage_nfe[i] = acc.frobenius_norm() / xnorm;
    }
  }
  return {std::move(model), std::move(report)};
}

DenseTensor mrlr_reconstruct(const MrlrModel& model) {
  DenseTensor X(model.shape);
  for (const MrlrStage& stage : model.stages) {
    stage.partition.validate(static_cast<Index>(model.shape.size()));
    DenseTensor Z = stage_tensor(stage, model.shape);
    Eigen::Map<Eigen::VectorXd>(X.data().data(), X.size()) +=
        Eigen::Map<const Eigen::VectorXd>(Z.data().data(), Z.size());
  }
  return X;
}

Index param_count(const MrlrModel& model) {
  Index n = 0;
  for (const MrlrStage& stage : model.stages) n += stage.factors.entry_count();
  return n;
}

Index param_count(const PartitionPlan& plan, const Shape& shape) {
  plan.validate(static_cast<Index>(shape.size()));
  Index n = 0;
  for (const PlanStage& st : plan.stages) {
    Index per_rank = 0;
    for (Index g : st.partition.reshaped_shape(shape)) per_rank += g;
    n += st.rank * per_rank;
  }
  return n;
}

double estimate_params_regular(double eta, Index order,
                               std::span<const Index> ranks) {
  if (eta < 1.0) throw validation_error("eta must be >= 1");
  if (order < 2) throw validation_error("order must be >= 2");
  if (static_cast<Index>(ranks.size()) != order - 1)
    throw validation_error("need one rank per regular partition (order - 1)");
  double total = 0.0;
  for (Index l = 1; l < order; ++l) {
    const Index rank = ranks[static_cast<std::size_t>(l - 1)];
    if (rank < 0) throw validation_error("ranks must be >= 0");
    total += static_cast<double>(rank) * static_cast<double>(l + 1) *
             std::pow(eta, static_cast<double>(order) /
                               static_cast<double>(l + 1));
  }
  return total;
}

}  // namespace mrlr
