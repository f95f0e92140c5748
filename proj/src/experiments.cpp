#include "mrlr/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

namespace mrlr {

namespace {

constexpr std::uint64_t kSweepSeedStride = 7919;

SweepRow fit_row(const DenseTensor& X, const PartitionPlan& plan,
                 const AlsConfig& cfg, std::string method) {
  const auto t0 = std::chrono::steady_clock::now();
  auto [model, report] = mrlr_fit(X, plan, cfg);
  SweepRow row;
  row.method = std::move(method);
  for (const PlanStage& st : plan.stages) row.stage_ranks.push_back(st.rank);
  row.params = param_count(model);
  row.nfe = report.stage_nfe.back();
  for (int s : report.stage_sweeps) row.sweeps += s;
  row.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  row.seed = cfg.seed;
  return row;
}

}  // namespace

GridSpec GridSpec::uniform(double start, double step, Index count) {
  GridSpec g;
  g.axes.fill(GridAxis{start, step, count});
  g.validate();
  return g;
}

void GridSpec::validate() const {
  for (const GridAxis& a : axes) {
    if (a.count < 1) throw validation_error("grid axis count must be >= 1");
    if (!(a.step > 0.0)) throw validation_error("grid step must be > 0");
  }
}

double nfe(const DenseTensor& X, const DenseTensor& Xhat) {
  if (X.shape() != Xhat.shape())
    throw validation_error("nfe: shapes differ");
  const double xnorm = X.frobenius_norm();
  if (xnorm == 0.0) throw numeric_error("nfe: zero-norm reference tensor");
  return (Eigen::Map<const Eigen::VectorXd>(X.data().data(), X.size()) -
          Eigen::Map<const Eigen::VectorXd>(Xhat.data().data(), Xhat.size()))
             .norm() /
         xnorm;
}

DenseTensor sample_function_tensor(const GridSpec& grid) {
  grid.validate();
  const auto& [a1, a2, a3] = grid.axes;
  DenseTensor X({a1.count, a2.count, a3.count});
  double* out = X.data().data();
  for (Index k = 0; k < a3.count; ++k) {
    const double x3 = a3.start + static_cast<double>(k) * a3.step;
    for (Index j = 0; j < a2.count; ++j) {
      const double x2 = a2.start + static_cast<double>(j) * a2.step;
      const double damp = std::exp(-std::abs(x2 + x3));
      for (Index i = 0; i < a1.count; ++i) {
        const double x1 = a1.start + static_cast<double>(i) * a1.step;
        *out++ = (x1 * x1 + x2 * x2) * damp;
      }
    }
  }
  return X;
}

std::vector<SweepRow> rank_sweep(const DenseTensor& X,
                                 const PartitionPlan& base_plan,
                                 const std::vector<Index>& sweep_ranks,
                                 bool baseline, const AlsConfig& cfg) {
  base_plan.validate(X.order());
  cfg.validate();
  if (sweep_ranks.empty()) throw validation_error("sweep_ranks is empty");
  for (std::size_t i = 0; i < sweep_ranks.size(); ++i) {
    if (sweep_ranks[i] < 1) throw validation_error("sweep ranks must be >= 1");
    if (i > 0 && sweep_ranks[i] <= sweep_ranks[i - 1])
      throw validation_error("sweep ranks must be ascending");
  }

  std::vector<SweepRow> rows;
  for (Index r : sweep_ranks) {
    PartitionPlan plan = base_plan;
    plan.stages.back().rank = r;
    AlsConfig point_cfg = cfg;
    point_cfg.seed = cfg.seed + kSweepSeedStride * static_cast<std::uint64_t>(r);
    rows.push_back(fit_row(X, plan, point_cfg, "mrlr"));
  }

  if (baseline) {
    Index unit = 0;
    for (Index n : X.shape()) unit += n;
    Index lo = rows.front().params, hi = rows.front().params;
    for (const SweepRow& row : rows) {
      lo = std::min(lo, row.params);
      hi = std::max(hi, row.params);
    }
    // One CP rank near each MRLR budget, plus ranks bracketing the range.
    std::set<Index> ranks;
    ranks.insert(std::max<Index>(1, lo / unit));
    ranks.insert(std::max<Index>(1, (hi + unit - 1) / unit));
    for (const SweepRow& row : rows)
      ranks.insert(std::max<Index>(
          1, static_cast<Index>(std::llround(static_cast<double>(row.params) /
                                             static_cast<double>(unit)))));

    PartitionPlan cp_plan;
    cp_plan.stages.push_back({ModePartition::identity(X.order()), 1});
    for (Index r : ranks) {
      cp_plan.stages.back().rank = r;
      AlsConfig point_cfg = cfg;
      point_cfg.seed =
          cfg.seed + kSweepSeedStride * static_cast<std::uint64_t>(r);
      rows.push_back(fit_row(X, cp_plan, point_cfg, "parafac"));
    }
  }

  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.method, a.params, a.seed) <
           std::tie(b.method, b.params, b.seed);
  });
  return rows;
}

}  // namespace mrlr
