// Python bindings for the main operations. Tensors cross the boundary as
// numpy arrays; the library's colexicographic layout is numpy's Fortran
// order, so inputs are taken (and outputs returned) F-contiguous. Mode
// indices and partition entries are 1-based, matching the CLI and the file
// formats.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mrlr/experiments.hpp"
#include "mrlr/io.hpp"
#include "mrlr/mrlr.hpp"

namespace py = pybind11;
using namespace mrlr;

namespace {

using FArray = py::array_t<double, py::array::f_style | py::array::forcecast>;
using Groups = std::vector<std::vector<int>>;
using PlanStages = std::vector<std::pair<Groups, Index>>;

DenseTensor to_tensor(const FArray& a) {
  if (a.ndim() < 1) throw validation_error("tensor order must be >= 1");
  Shape shape(static_cast<std::size_t>(a.ndim()));
  for (py::ssize_t i = 0; i < a.ndim(); ++i)
    shape[static_cast<std::size_t>(i)] = a.shape(i);
  std::vector<double> data(a.data(), a.data() + a.size());
  return {std::move(shape), std::move(data)};
}

py::array_t<double> from_tensor(const DenseTensor& X) {
  std::vector<py::ssize_t> shape(X.shape().begin(), X.shape().end());
  std::vector<py::ssize_t> strides(shape.size());
  py::ssize_t acc = static_cast<py::ssize_t>(sizeof(double));
  for (std::size_t m = 0; m < shape.size(); ++m) {
    strides[m] = acc;
    acc *= shape[m];
  }
  py::array_t<double> out(shape, strides);
  std::copy(X.data().begin(), X.data().end(), out.mutable_data());
  return out;
}

ModePartition to_partition(const Groups& groups) { return {groups}; }

FactorSet to_factors(const std::vector<Matrix>& factors) {
  FactorSet F;
  F.factors = factors;
  F.rank = factors.empty() ? 0 : factors.front().cols();
  F.validate();
  return F;
}

Shape factor_shape(const FactorSet& F) {
  Shape shape;
  for (const Matrix& f : F.factors) shape.push_back(f.rows());
  return shape;
}

PartitionPlan to_plan(const PlanStages& stages) {
  PartitionPlan plan;
  plan.ordering = StageOrdering::as_given;
  for (const auto& [groups, rank] : stages)
    plan.stages.push_back({to_partition(groups), rank});
  return plan;
}

}  // namespace

PYBIND11_MODULE(_mrlr, m) {
  m.doc() = "Multi-resolution low-rank tensor decomposition";

  py::register_exception<validation_error>(m, "ValidationError",
                                           PyExc_ValueError);
  py::register_exception<numeric_error>(m, "NumericError",
                                        PyExc_ArithmeticError);
  py::register_exception<io_error>(m, "IoError", PyExc_OSError);

  py::class_<AlsConfig>(m, "AlsConfig")
      .def(py::init([](int max_sweeps, double rel_tol, std::uint64_t seed,
                       int restarts) {
             AlsConfig cfg;
             cfg.max_sweeps = max_sweeps;
             cfg.rel_tol = rel_tol;
             cfg.seed = seed;
             cfg.restarts = restarts;
             cfg.validate();
             return cfg;
           }),
           py::arg("max_sweeps") = 200, py::arg("rel_tol") = 1e-8,
           py::arg("seed") = 0, py::arg("restarts") = 1)
      .def_readonly("max_sweeps", &AlsConfig::max_sweeps)
      .def_readonly("rel_tol", &AlsConfig::rel_tol)
      .def_readonly("seed", &AlsConfig::seed)
      .def_readonly("restarts", &AlsConfig::restarts);

  py::class_<AlsTrace>(m, "AlsTrace")
      .def_readonly("errors", &AlsTrace::errors)
      .def_readonly("sweeps_run", &AlsTrace::sweeps_run)
      .def_readonly("converged", &AlsTrace::converged)
      .def_readonly("gram_fallbacks", &AlsTrace::gram_fallbacks);

  py::class_<FitReport>(m, "FitReport")
      .def_readonly("stage_nfe", &FitReport::stage_nfe)
      .def_readonly("stage_params", &FitReport::stage_params)
      .def_readonly("cumulative_params", &FitReport::cumulative_params)
      .def_readonly("stage_sweeps", &FitReport::stage_sweeps)
      .def_readonly("stage_seconds", &FitReport::stage_seconds)
      .def_readonly("seed", &FitReport::seed);

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("method", &SweepRow::method)
      .def_readonly("stage_ranks", &SweepRow::stage_ranks)
      .def_readonly("params", &SweepRow::params)
      .def_readonly("nfe", &SweepRow::nfe)
      .def_readonly("sweeps", &SweepRow::sweeps)
      .def_readonly("seconds", &SweepRow::seconds)
      .def_readonly("seed", &SweepRow::seed);

  py::class_<MrlrModel>(m, "MrlrModel")
      .def_property_readonly(
          "shape", [](const MrlrModel& model) { return model.shape; })
      .def_property_readonly("stages",
                             [](const MrlrModel& model) {
                               py::list out;
                               for (const MrlrStage& st : model.stages)
                                 out.append(py::make_tuple(st.partition.groups,
                                                           st.factors.rank,
                                                           st.factors.factors));
                               return out;
                             })
      .def("__len__",
           [](const MrlrModel& model) { return model.stages.size(); });

  m.def("mat_unfold",
        [](const FArray& X, int p) { return mat_unfold(to_tensor(X), p); },
        py::arg("tensor"), py::arg("mode"),
        "Mode-p unfolding into a (prod of other sizes) x N_p matrix; "
        "mode is 1-based.");
  m.def("mat_fold",
        [](const Matrix& M, const Shape& shape, int p) {
          return from_tensor(mat_fold(M, shape, p));
        },
        py::arg("matrix"), py::arg("shape"), py::arg("mode"));
  m.def("ten_reshape",
        [](const FArray& X, const Groups& groups) {
          return from_tensor(ten_reshape(to_tensor(X), to_partition(groups)));
        },
        py::arg("tensor"), py::arg("partition"),
        "Merge mode groups (1-based, e.g. [[2,3],[1]]) into a lower-order "
        "tensor.");
  m.def("unten_reshape",
        [](const FArray& Y, const Groups& groups, const Shape& shape) {
          return from_tensor(
              unten_reshape(to_tensor(Y), to_partition(groups), shape));
        },
        py::arg("tensor"), py::arg("partition"), py::arg("shape"));
  m.def("khatri_rao", &khatri_rao, py::arg("a"), py::arg("b"),
        "Column-wise Kronecker product, second factor's rows fastest.");
  m.def("cp_reconstruct",
        [](const std::vector<Matrix>& factors) {
          const FactorSet F = to_factors(factors);
          return from_tensor(cp_reconstruct(F, factor_shape(F)));
        },
        py::arg("factors"));
  m.def("cp_mat_form",
        [](const std::vector<Matrix>& factors, int p) {
          return cp_mat_form(to_factors(factors), p);
        },
        py::arg("factors"), py::arg("mode"));
  m.def("cp_reshape_factors",
        [](const std::vector<Matrix>& factors, const Groups& groups) {
          return cp_reshape_factors(to_factors(factors), to_partition(groups))
              .factors;
        },
        py::arg("factors"), py::arg("partition"));
  m.def("init_factors",
        [](const Shape& shape, Index rank, std::uint64_t seed) {
          return init_factors(shape, rank, seed).factors;
        },
        py::arg("shape"), py::arg("rank"), py::arg("seed") = 0);
  m.def("als_fit",
        [](const FArray& X, Index rank, const AlsConfig& cfg) {
          auto [F, trace] = als_fit(to_tensor(X), rank, cfg);
          return py::make_tuple(F.factors, trace);
        },
        py::arg("tensor"), py::arg("rank"), py::arg("config") = AlsConfig{},
        "Rank-R CP fit by alternating least squares; returns (factors, "
        "trace).");
  m.def("regular_partitions",
        [](Index order) {
          std::vector<Groups> out;
          for (const ModePartition& P : regular_partitions(order))
            out.push_back(P.groups);
          return out;
        },
        py::arg("order"));
  m.def("mrlr_fit",
        [](const FArray& X, const PlanStages& stages, const AlsConfig& cfg,
           int refinement_cycles) {
          auto [model, report] =
              mrlr_fit(to_tensor(X), to_plan(stages), cfg, refinement_cycles);
          return py::make_tuple(std::move(model), std::move(report));
        },
        py::arg("tensor"), py::arg("plan"), py::arg("config") = AlsConfig{},
        py::arg("refinement_cycles") = 0,
        "Sequential residual fit of (partition, rank) stages; returns "
        "(model, report).");
  m.def("mrlr_reconstruct",
        [](const MrlrModel& model) { return from_tensor(mrlr_reconstruct(model)); },
        py::arg("model"));
  m.def("param_count",
        [](const MrlrModel& model) { return param_count(model); },
        py::arg("model"));
  m.def("plan_param_count",
        [](const PlanStages& stages, const Shape& shape) {
          return param_count(to_plan(stages), shape);
        },
        py::arg("plan"), py::arg("shape"));
  m.def("estimate_params_regular",
        [](double eta, Index order, const std::vector<Index>& ranks) {
          return estimate_params_regular(eta, order, ranks);
        },
        py::arg("eta"), py::arg("order"), py::arg("ranks"));
  m.def("nfe",
        [](const FArray& X, const FArray& Xhat) {
          return nfe(to_tensor(X), to_tensor(Xhat));
        },
        py::arg("tensor"), py::arg("approximation"),
        "Normalized Frobenius error.");
  m.def("sample_function_tensor",
        [](double start, double step, Index count) {
          return from_tensor(
              sample_function_tensor(GridSpec::uniform(start, step, count)));
        },
        py::arg("start") = -5.0, py::arg("step") = 0.1, py::arg("count") = 100,
        "Sample (x1^2 + x2^2) * exp(-|x2 + x3|) on a uniform 3-axis grid.");
  m.def("rank_sweep",
        [](const FArray& X, const PlanStages& stages,
           const std::vector<Index>& sweep_ranks, bool baseline,
           const AlsConfig& cfg) {
          return rank_sweep(to_tensor(X), to_plan(stages), sweep_ranks,
                            baseline, cfg);
        },
        py::arg("tensor"), py::arg("plan"), py::arg("sweep_ranks"),
        py::arg("baseline") = false, py::arg("config") = AlsConfig{});
  m.def("read_tensor",
        [](const std::string& path) { return from_tensor(read_tensor(path)); },
        py::arg("path"));
  m.def("write_tensor",
        [](const std::string& path, const FArray& X) {
          write_tensor(path, to_tensor(X));
        },
        py::arg("path"), py::arg("tensor"));
  m.def("read_model", &read_model, py::arg("path"));
  m.def("write_model", &write_model, py::arg("path"), py::arg("model"));
}
