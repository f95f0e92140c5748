#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SVD>

#include "mrlr/experiments.hpp"
#include "mrlr/mrlr.hpp"
#include "oracles.hpp"

using namespace mrlr;

namespace {

// 5x201x61 tensor that is exactly rank 1 after the {{2},{1,3}} reshape.
DenseTensor exact_res1_instance() {
  const Matrix M = oracle::random_matrix(201, 1, 501) *
                   oracle::random_matrix(305, 1, 502).transpose();
  DenseTensor Y({201, 305},
                std::vector<double>(M.data(), M.data() + M.size()));
  return unten_reshape(Y, ModePartition{{{2}, {1, 3}}}, {5, 201, 61});
}

PartitionPlan res1_plan(Index rank) {
  PartitionPlan plan;
  plan.stages.push_back({ModePartition{{{2}, {1, 3}}}, rank});
  return plan;
}

}  // namespace

TEST_CASE("regular_partitions closed form for small orders") {
  using Groups = std::vector<std::vector<int>>;
  const auto p4 = regular_partitions(4);
  REQUIRE(p4.size() == 3);
  CHECK((p4[0].groups == Groups{{1, 2}, {3, 4}}));
  CHECK((p4[1].groups == Groups{{1}, {2}, {3, 4}}));
  CHECK((p4[2].groups == Groups{{1}, {2}, {3}, {4}}));

  const auto p3 = regular_partitions(3);
  REQUIRE(p3.size() == 2);
  CHECK((p3[0].groups == Groups{{1}, {2, 3}}));
  CHECK((p3[1].groups == Groups{{1}, {2}, {3}}));

  const auto p2 = regular_partitions(2);
  REQUIRE(p2.size() == 1);
  CHECK((p2[0].groups == Groups{{1}, {2}}));

  CHECK_THROWS_AS(regular_partitions(1), validation_error);
}

TEST_CASE("regular_partitions are valid, contiguous, near-equal for I <= 8") {
  for (Index I = 2; I <= 8; ++I) {
    const auto parts = regular_partitions(I);
    REQUIRE(parts.size() == static_cast<std::size_t>(I - 1));
    for (std::size_t l = 0; l < parts.size(); ++l) {
      parts[l].validate(I);
      CHECK(parts[l].group_count() == static_cast<Index>(l) + 2);
      Index smallest = I, largest = 0;
      int next = 1;
      for (const auto& g : parts[l].groups) {
        for (int mode : g) CHECK(mode == next++);  // contiguous ascending
        smallest = std::min(smallest, static_cast<Index>(g.size()));
        largest = std::max(largest, static_cast<Index>(g.size()));
      }
      CHECK(largest - smallest <= 1);
    }
  }
}

TEST_CASE("PartitionPlan validation") {
  PartitionPlan plan;
  CHECK_THROWS_AS(plan.validate(3), validation_error);
  plan.stages.push_back({ModePartition::identity(3), 1});
  plan.stages.push_back({ModePartition::single_group(3), 1});
  CHECK_THROWS_AS(plan.validate(3), validation_error);  // 3 groups then 1
  plan.ordering = StageOrdering::as_given;
  plan.validate(3);
  std::reverse(plan.stages.begin(), plan.stages.end());
  plan.ordering = StageOrdering::coarse_to_fine;
  plan.validate(3);
  plan.stages[0].rank = 0;
  CHECK_THROWS_AS(plan.validate(3), validation_error);
}

TEST_CASE("param_count formula on the four-mode video shapes") {
  const Shape shape{9, 36, 54, 3};
  PartitionPlan plan;
  plan.stages.push_back({ModePartition{{{1, 2}, {3, 4}}}, 1});
  CHECK(param_count(plan, shape) == 486);

  plan.stages[0] = {ModePartition{{{1}, {2}, {3, 4}}}, 1};
  CHECK(param_count(plan, shape) == 207);

  for (Index rank : {1, 2, 7}) {
    plan.stages[0] = {ModePartition::identity(4), rank};
    CHECK(param_count(plan, shape) == 102 * rank);
  }

  PartitionPlan vec_plan;
  vec_plan.stages.push_back({ModePartition::identity(1), 1});
  CHECK(param_count(vec_plan, Shape{17}) == 17);
}

TEST_CASE("param_count of a fitted model equals its stored scalars") {
  const DenseTensor X = oracle::random_tensor({4, 5, 6}, 601);
  PartitionPlan plan;
  plan.stages.push_back({ModePartition{{{1, 2}, {3}}}, 2});
  plan.stages.push_back({ModePartition::identity(3), 3});
  AlsConfig cfg;
  cfg.max_sweeps = 10;
  const auto [model, report] = mrlr_fit(X, plan, cfg);
  CHECK(param_count(model) == param_count(plan, X.shape()));
  Index scalars = 0;
  for (const MrlrStage& st : model.stages)
    for (const Matrix& f : st.factors.factors) scalars += f.size();
  CHECK(param_count(model) == scalars);
  CHECK(report.cumulative_params.back() == scalars);
}

TEST_CASE("estimate_params_regular closed form") {
  const Index ranks4[] = {1, 1, 1};
  CHECK(estimate_params_regular(16.0, 4, ranks4) ==
        doctest::Approx(697.0).epsilon(0.0002));
  const Index ranks2[] = {5};
  CHECK(estimate_params_regular(10.0, 2, ranks2) == doctest::Approx(100.0));
  const Index zeros[] = {0, 0, 0};
  CHECK(estimate_params_regular(16.0, 4, zeros) == 0.0);
  CHECK_THROWS_AS(estimate_params_regular(0.5, 4, ranks4), validation_error);
  CHECK_THROWS_AS(estimate_params_regular(4.0, 2, ranks4), validation_error);
}

TEST_CASE("mrlr_fit nails an exactly representable single stage") {
  const DenseTensor X = exact_res1_instance();
  AlsConfig cfg;
  cfg.seed = 3;
  const auto [model, report] = mrlr_fit(X, res1_plan(1), cfg);
  CHECK(report.stage_nfe.back() <= 1e-8);
  CHECK(nfe(X, mrlr_reconstruct(model)) <= 1e-8);
}

TEST_CASE("stages after an exact fit see a degenerate residual") {
  const DenseTensor X = exact_res1_instance();
  PartitionPlan plan = res1_plan(1);
  plan.stages.push_back({ModePartition::identity(3), 2});
  AlsConfig cfg;
  cfg.seed = 3;
  const auto [model, report] = mrlr_fit(X, plan, cfg);
  REQUIRE(model.stages.size() == 2);
  CHECK(report.stage_nfe[0] <= 1e-8);
  CHECK(report.stage_nfe[1] <= 1e-8);
  for (const Matrix& f : model.stages[1].factors.factors)
    CHECK(f.norm() == 0.0);
  // the stage is still counted at its nominal size: 2 * (5 + 201 + 61)
  CHECK(report.stage_params[1] == 534);
}

TEST_CASE("mrlr_fit input validation") {
  const DenseTensor X = oracle::random_tensor({3, 4}, 700);
  PartitionPlan empty;
  CHECK_THROWS_AS(mrlr_fit(X, empty, AlsConfig{}), validation_error);
  PartitionPlan plan;
  plan.stages.push_back({ModePartition::identity(2), 1});
  CHECK_THROWS_AS(mrlr_fit(DenseTensor({3, 4}), plan, AlsConfig{}),
                  numeric_error);
  PartitionPlan mismatched;
  mismatched.stages.push_back({ModePartition::identity(3), 1});
  CHECK_THROWS_AS(mrlr_fit(X, mismatched, AlsConfig{}), validation_error);
}

TEST_CASE("residual telescoping and stage-wise NFE monotonicity") {
  const DenseTensor X = oracle::random_tensor({4, 6, 5}, 800);
  PartitionPlan plan;
  plan.stages.push_back({ModePartition{{{1, 2}, {3}}}, 2});
  plan.stages.push_back({ModePartition{{{1}, {2, 3}}}, 1});
  plan.stages.push_back({ModePartition::identity(3), 2});
  plan.ordering = StageOrdering::as_given;
  AlsConfig cfg;
  cfg.seed = 12;
  cfg.max_sweeps = 30;
  const auto [model, report] = mrlr_fit(X, plan, cfg);

  for (std::size_t i = 1; i < report.stage_nfe.size(); ++i)
    CHECK(report.stage_nfe[i] <= report.stage_nfe[i - 1] + 1e-10);

  const DenseTensor recon = mrlr_reconstruct(model);
  CHECK(std::abs(nfe(X, recon) - report.stage_nfe.back()) <= 1e-12);
}

TEST_CASE("reconstruction of zero-factor stages is the zero tensor") {
  MrlrModel model;
  model.shape = {3, 4};
  model.stages.push_back(
      {ModePartition::identity(2), FactorSet::zero({3, 4}, 2), AlsTrace{}});
  CHECK(mrlr_reconstruct(model).frobenius_norm() == 0.0);
}

TEST_CASE("stage reshapes obey the rank bound") {
  const DenseTensor X = oracle::random_tensor({4, 4, 4}, 900);
  PartitionPlan plan;
  plan.stages.push_back({ModePartition{{{1, 2}, {3}}}, 2});
  AlsConfig cfg;
  cfg.seed = 7;
  const auto [model, report] = mrlr_fit(X, plan, cfg);
  DenseTensor Z(model.stages[0].partition.reshaped_shape(X.shape()));
  cp_accumulate(model.stages[0].factors, 1.0, Z.data());
  const Eigen::Map<const Matrix> M(Z.data().data(), 16, 4);
  Eigen::JacobiSVD<Matrix> svd(M);
  CHECK(svd.singularValues()(2) <= 1e-9 * svd.singularValues()(0));
}

TEST_CASE("refinement keeps telescoping when a stage becomes redundant") {
  const DenseTensor X = exact_res1_instance();
  PartitionPlan plan = res1_plan(1);
  plan.stages.push_back({ModePartition::identity(3), 1});
  AlsConfig cfg;
  cfg.seed = 9;
  const auto [model, report] = mrlr_fit(X, plan, cfg, 2);
  CHECK(report.stage_nfe.back() <= 1e-8);
  CHECK(nfe(X, mrlr_reconstruct(model)) <= 1e-8);
  // stage 1 still explains X, so the fine stage stays at zero
  for (const Matrix& f : model.stages[1].factors.factors)
    CHECK(f.norm() == 0.0);
}

TEST_CASE("refinement cycles never worsen the fit") {
  const DenseTensor X = oracle::random_tensor({5, 4, 6}, 1000);
  PartitionPlan plan;
  plan.stages.push_back({ModePartition{{{1, 2}, {3}}}, 1});
  plan.stages.push_back({ModePartition::identity(3), 2});
  AlsConfig cfg;
  cfg.seed = 5;
  cfg.max_sweeps = 25;
  const auto [m0, r0] = mrlr_fit(X, plan, cfg, 0);
  const auto [m2, r2] = mrlr_fit(X, plan, cfg, 2);
  CHECK(r2.stage_nfe.back() <= r0.stage_nfe.back() + 1e-10);
  CHECK(std::abs(nfe(X, mrlr_reconstruct(m2)) - r2.stage_nfe.back()) <= 1e-12);
}
