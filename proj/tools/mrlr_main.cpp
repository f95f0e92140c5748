// Command-line driver: generate | decompose | sweep | info.
//
// Exit codes: 0 success, 1 parse/IO failure, 2 dimension or partition
// validation failure, 3 numerical failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mrlr/experiments.hpp"
#include "mrlr/io.hpp"
#include "mrlr/mrlr.hpp"

namespace {

using namespace mrlr;

std::vector<Index> parse_index_list(const std::string& spec,
                                    const char* what) {
  std::vector<Index> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t next = spec.find(',', pos);
    const std::string item = spec.substr(pos, next - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw validation_error(std::string(what) + ": bad entry '" + item + "'");
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

// "a:b", "a:b:step", or a comma list.
std::vector<Index> parse_sweep_ranks(const std::string& spec) {
  if (spec.find(':') == std::string::npos)
    return parse_index_list(spec, "--sweep");
  std::vector<Index> parts;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t next = spec.find(':', pos);
    parts.push_back(parse_index_list(spec.substr(pos, next - pos), "--sweep")
                        .front());
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (parts.size() < 2 || parts.size() > 3)
    throw validation_error("--sweep: want first:last[:step]");
  const Index step = parts.size() == 3 ? parts[2] : 1;
  if (step < 1) throw validation_error("--sweep: step must be >= 1");
  if (parts[1] < parts[0])
    throw validation_error("--sweep: last must be >= first");
  std::vector<Index> out;
  for (Index r = parts[0]; r <= parts[1]; r += step) out.push_back(r);
  return out;
}

struct FitOptions {
  std::uint64_t seed = 0;
  int max_sweeps = 200;
  double rel_tol = 1e-8;
  int restarts = 1;

  AlsConfig config() const {
    AlsConfig cfg;
    cfg.seed = seed;
    cfg.max_sweeps = max_sweeps;
    cfg.rel_tol = rel_tol;
    cfg.restarts = restarts;
    cfg.validate();
    return cfg;
  }
};

void add_fit_options(CLI::App* cmd, FitOptions& opt) {
  cmd->add_option("--seed", opt.seed, "Base RNG seed");
  cmd->add_option("--max-sweeps", opt.max_sweeps, "ALS sweep cap per stage");
  cmd->add_option("--tol", opt.rel_tol,
                  "Relative fit-change stopping tolerance");
  cmd->add_option("--restarts", opt.restarts,
                  "Random ALS restarts per stage (best kept)");
}

std::string shape_string(const Shape& shape) {
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(shape[i]);
  }
  return out;
}

PartitionPlan build_plan(const DenseTensor& X, const std::string& partitions,
                         const std::vector<Index>& levels,
                         const std::vector<Index>& ranks, bool reverse) {
  std::vector<ModePartition> parts;
  if (partitions == "auto") {
    const auto regular = regular_partitions(X.order());
    std::vector<Index> chosen = levels;
    if (chosen.empty())
      for (Index l = 1; l <= static_cast<Index>(regular.size()); ++l)
        chosen.push_back(l);
    for (Index l : chosen) {
      if (l < 1 || l > static_cast<Index>(regular.size()))
        throw validation_error("--levels: level " + std::to_string(l) +
                               " out of range 1.." +
                               std::to_string(regular.size()));
      parts.push_back(regular[static_cast<std::size_t>(l - 1)]);
    }
  } else {
    if (!levels.empty())
      throw validation_error("--levels only applies to --partitions auto");
    parts = parse_plan_partitions(partitions);
  }
  if (ranks.size() != parts.size())
    throw validation_error("--ranks: got " + std::to_string(ranks.size()) +
                           " ranks for " + std::to_string(parts.size()) +
                           " stages");

  PartitionPlan plan;
  for (std::size_t i = 0; i < parts.size(); ++i)
    plan.stages.push_back({std::move(parts[i]), ranks[i]});
  if (reverse) std::reverse(plan.stages.begin(), plan.stages.end());

  plan.ordering = StageOrdering::coarse_to_fine;
  for (std::size_t i = 1; i < plan.stages.size(); ++i)
    if (plan.stages[i].partition.group_count() <
        plan.stages[i - 1].partition.group_count())
      plan.ordering = StageOrdering::as_given;
  plan.validate(X.order());
  return plan;
}

int run_generate(const std::string& out, const std::string& function,
                 const std::string& grid_spec, bool random_cp,
                 const std::string& shape_spec, Index rank,
                 std::uint64_t seed) {
  if (random_cp == !function.empty())
    throw validation_error("choose exactly one of --function / --random-cp");
  DenseTensor X;
  if (random_cp) {
    if (shape_spec.empty())
      throw validation_error("--random-cp requires --shape");
    const std::vector<Index> dims = parse_index_list(shape_spec, "--shape");
    X = cp_reconstruct(init_factors(Shape(dims.begin(), dims.end()), rank, seed),
                       Shape(dims.begin(), dims.end()));
  } else {
    if (function != "paper-f3")
      throw validation_error("unknown --function '" + function +
                             "' (available: paper-f3)");
    double start = 0, step = 0;
    Index count = 0;
    {
      std::istringstream ss(grid_spec);
      char c1, c2;
      if (!(ss >> start >> c1 >> step >> c2 >> count) || c1 != ',' ||
          c2 != ',' || ss.peek() != std::istream::traits_type::eof())
        throw validation_error("--grid: want start,step,count");
    }
    X = sample_function_tensor(GridSpec::uniform(start, step, count));
  }
  write_tensor(out, X);
  std::cout << "wrote " << shape_string(X.shape()) << " tensor to " << out
            << "\n";
  return 0;
}

int run_decompose(const std::string& in, const std::string& partitions,
                  const std::string& levels_spec, const std::string& ranks_spec,
                  bool reverse, int refine, const FitOptions& fit,
                  const std::string& model_out, const std::string& report_out) {
  const DenseTensor X = read_tensor(in);
  const std::vector<Index> levels =
      levels_spec.empty() ? std::vector<Index>{}
                          : parse_index_list(levels_spec, "--levels");
  const PartitionPlan plan = build_plan(
      X, partitions, levels, parse_index_list(ranks_spec, "--ranks"), reverse);

  const auto [model, report] = mrlr_fit(X, plan, fit.config(), refine);

  std::cout << "tensor: " << shape_string(X.shape()) << " (" << X.size()
            << " entries)\n";
  for (std::size_t i = 0; i < model.stages.size(); ++i) {
    std::cout << "stage " << i + 1 << ": partition "
              << format_partition(model.stages[i].partition) << " rank "
              << model.stages[i].factors.rank << " nfe "
              << format_real(report.stage_nfe[i]) << " params "
              << report.cumulative_params[i] << " sweeps "
              << report.stage_sweeps[i] << "\n";
  }
  std::cout << "total params: " << param_count(model) << "\n"
            << "final nfe: " << format_real(report.stage_nfe.back()) << "\n";

  if (!model_out.empty()) write_model(model_out, model);
  if (!report_out.empty()) {
    std::ofstream os(report_out);
    if (!os) throw io_error(report_out + ": cannot open for writing");
    write_sweep_csv(os, report_rows(model, report,
                                    reverse ? "mrlr-reverse" : "mrlr"));
  }
  return 0;
}

int run_sweep(const std::string& in, const std::string& plan_spec,
              const std::string& ranks_spec, const std::string& sweep_spec,
              bool baseline, const FitOptions& fit, const std::string& out) {
  const DenseTensor X = read_tensor(in);
  std::vector<ModePartition> parts = parse_plan_partitions(plan_spec);
  std::vector<Index> ranks =
      ranks_spec.empty() ? std::vector<Index>(parts.size(), 1)
                         : parse_index_list(ranks_spec, "--ranks");
  if (ranks.size() != parts.size())
    throw validation_error("--ranks: got " + std::to_string(ranks.size()) +
                           " ranks for " + std::to_string(parts.size()) +
                           " stages");
  PartitionPlan plan;
  plan.ordering = StageOrdering::as_given;
  for (std::size_t i = 0; i < parts.size(); ++i)
    plan.stages.push_back({std::move(parts[i]), ranks[i]});
  plan.validate(X.order());

  const auto rows =
      rank_sweep(X, plan, parse_sweep_ranks(sweep_spec), baseline, fit.config());
  if (out.empty()) {
    write_sweep_csv(std::cout, rows);
  } else {
    std::ofstream os(out);
    if (!os) throw io_error(out + ": cannot open for writing");
    write_sweep_csv(os, rows);
    std::cout << "wrote " << rows.size() << " rows to " << out << "\n";
  }
  return 0;
}

int run_info(const std::string& in, const std::string& ref) {
  std::ifstream probe(in, std::ios::binary);
  if (!probe) throw io_error(in + ": cannot open for reading");
  std::string magic;
  probe >> magic;
  probe.close();

  if (magic == "MRLR1") {
    const DenseTensor X = read_tensor(in);
    std::cout << "tensor file: " << in << "\n"
              << "order: " << X.order() << "\n"
              << "shape: " << shape_string(X.shape()) << "\n"
              << "entries: " << X.size() << "\n"
              << "frobenius norm: " << format_real(X.frobenius_norm()) << "\n";
    return 0;
  }
  if (magic != "MRLRM1")
    throw io_error(in + ": bad magic '" + magic +
                   "' (want MRLR1 or MRLRM1)");

  const MrlrModel model = read_model(in);
  std::optional<DenseTensor> reference;
  if (!ref.empty()) {
    reference = read_tensor(ref);
    if (reference->shape() != model.shape)
      throw validation_error("--ref shape does not match the model");
  }
  std::cout << "model file: " << in << "\n"
            << "shape: " << shape_string(model.shape) << "\n"
            << "stages: " << model.stages.size() << "\n";
  Index cumulative = 0;
  DenseTensor partial(model.shape);
  for (std::size_t i = 0; i < model.stages.size(); ++i) {
    const MrlrStage& st = model.stages[i];
    const Index params = st.factors.entry_count();
    cumulative += params;
    std::cout << "stage " << i + 1 << ": partition "
              << format_partition(st.partition) << " rank " << st.factors.rank
              << " params " << params << " cumulative " << cumulative;
    if (reference) {
      MrlrModel head;
      head.shape = model.shape;
      head.stages.assign(model.stages.begin(),
                         model.stages.begin() + static_cast<long>(i) + 1);
      std::cout << " nfe " << format_real(nfe(*reference, mrlr_reconstruct(head)));
    }
    std::cout << "\n";
  }
  std::cout << "total params: " << param_count(model) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-resolution low-rank tensor decomposition"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "Worker threads for dense kernels")
      ->envname("MRLR_THREADS");

  auto* gen = app.add_subcommand("generate", "Write a synthetic tensor file");
  std::string gen_out, gen_function, gen_grid = "-5,0.1,100", gen_shape;
  bool gen_random = false;
  Index gen_rank = 1;
  std::uint64_t gen_seed = 0;
  gen->add_option("--out", gen_out, "Output tensor file")->required();
  gen->add_option("--function", gen_function,
                  "Built-in benchmark function (paper-f3)");
  gen->add_option("--grid", gen_grid, "Sampling grid start,step,count");
  gen->add_flag("--random-cp", gen_random, "Random low-rank CP tensor");
  gen->add_option("--shape", gen_shape, "Mode sizes, e.g. 6,7,8");
  gen->add_option("--rank", gen_rank, "CP rank for --random-cp");
  gen->add_option("--seed", gen_seed, "RNG seed for --random-cp");

  auto* dec = app.add_subcommand("decompose", "Fit an MRLR model");
  std::string dec_in, dec_partitions = "auto", dec_levels, dec_ranks;
  std::string dec_model_out, dec_report_out;
  bool dec_reverse = false;
  int dec_refine = 0;
  FitOptions dec_fit;
  dec->add_option("--in", dec_in, "Input tensor file")->required();
  dec->add_option("--partitions", dec_partitions,
                  "'auto' or stage partitions like '1,2|3;1|2|3'");
  dec->add_option("--levels", dec_levels,
                  "Regular-partition levels kept with 'auto', e.g. 1,3");
  dec->add_option("--ranks", dec_ranks, "Per-stage ranks, e.g. 1,4")
      ->required();
  dec->add_flag("--reverse", dec_reverse, "Fit stages fine-to-coarse");
  dec->add_option("--refine", dec_refine, "Extra refinement cycles");
  add_fit_options(dec, dec_fit);
  dec->add_option("--model-out", dec_model_out, "Model file to write");
  dec->add_option("--report-out", dec_report_out, "Per-stage CSV to write");

  auto* swp = app.add_subcommand("sweep", "Parameter-budget rank sweep");
  std::string swp_in, swp_plan, swp_ranks, swp_sweep, swp_out;
  bool swp_baseline = false;
  FitOptions swp_fit;
  swp->add_option("--in", swp_in, "Input tensor file")->required();
  swp->add_option("--plan", swp_plan, "Stage partitions, e.g. '1,2|3;1|2|3'")
      ->required();
  swp->add_option("--ranks", swp_ranks,
                  "Base stage ranks (default all 1; last is swept)");
  swp->add_option("--sweep", swp_sweep, "Last-stage ranks: first:last[:step]")
      ->required();
  swp->add_flag("--baseline", swp_baseline, "Also fit plain CP at "
                                            "bracketing ranks");
  add_fit_options(swp, swp_fit);
  swp->add_option("--out", swp_out, "CSV output path (default stdout)");

  auto* inf = app.add_subcommand("info", "Describe a tensor or model file");
  std::string inf_in, inf_ref;
  inf->add_option("--in", inf_in, "Tensor or model file")->required();
  inf->add_option("--ref", inf_ref,
                  "Reference tensor for per-stage NFE of a model");

  try {
    app.parse(argc, argv);
    if (threads > 0) Eigen::setNbThreads(threads);
    if (gen->parsed())
      return run_generate(gen_out, gen_function, gen_grid, gen_random,
                          gen_shape, gen_rank, gen_seed);
    if (dec->parsed())
      return run_decompose(dec_in, dec_partitions, dec_levels, dec_ranks,
                           dec_reverse, dec_refine, dec_fit, dec_model_out,
                           dec_report_out);
    if (swp->parsed())
      return run_sweep(swp_in, swp_plan, swp_ranks, swp_sweep, swp_baseline,
                       swp_fit, swp_out);
    if (inf->parsed()) return run_info(inf_in, inf_ref);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
