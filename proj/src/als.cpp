#include "mrlr/als.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace mrlr {

namespace {

// Below this many entries the sweep error is computed from an explicit
// residual; above it from inner products of the factor Grams, which avoids
// an O(R * prod N) reconstruction per sweep.
constexpr Index kExactErrorMaxSize = 1 << 18;

constexpr double kPinvThreshold = 1e-12;

Matrix hadamard_grams(const std::vector<Matrix>& grams, int skip) {
  const Index r = grams.front().rows();
  Matrix G = Matrix::Ones(r, r);
  for (int i = 0; i < static_cast<int>(grams.size()); ++i)
    if (i + 1 != skip) G = G.cwiseProduct(grams[static_cast<std::size_t>(i)]);
  return G;
}

double sweep_error_exact(const DenseTensor& X, const FactorSet& F) {
  std::vector<double> res(X.data().begin(), X.data().end());
  cp_accumulate(F, -1.0, res);
  return Eigen::Map<const Eigen::VectorXd>(res.data(),
                                           static_cast<Index>(res.size()))
      .norm();
}

// ||X - Xhat||^2 = ||X||^2 - 2 <C_J, F_J> + 1^T (hadamard of all Grams) 1,
// where C_J is the last mode's mttkrp taken before F_J was replaced.
double sweep_error_gram(double xnorm, const Matrix& c_last,
                        const Matrix& f_last,
                        const std::vector<Matrix>& grams) {
  const double t = c_last.cwiseProduct(f_last).sum();
  const double s = hadamard_grams(grams, 0).sum();
  return std::sqrt(std::max(0.0, xnorm * xnorm - 2.0 * t + s));
}

std::pair<FactorSet, AlsTrace> als_run(const DenseTensor& X, FactorSet F,
                                       const AlsConfig& cfg) {
  const Index J = X.order();
  const double xnorm = X.frobenius_norm();
  const bool exact_error = X.size() <= kExactErrorMaxSize;

  std::vector<Matrix> grams;
  grams.reserve(static_cast<std::size_t>(J));
  for (const Matrix& f : F.factors) grams.emplace_back(f.transpose() * f);

  AlsTrace trace;
  Matrix c_last;
  double prev = std::numeric_limits<double>::infinity();
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    for (int j = 1; j <= J; ++j) {
      const Matrix G = hadamard_grams(grams, j);
      Matrix C = mttkrp(X, F, j);
      Matrix H = gram_solve(G, C, &trace);
      const auto jj = static_cast<std::size_t>(j - 1);
      grams[jj].noalias() = H.transpose() * H;
      F.factors[jj] = std::move(H);
      if (!exact_error && j == J) c_last = std::move(C);
    }
    const double err =
        exact_error ? sweep_error_exact(X, F)
                    : sweep_error_gram(xnorm, c_last,
                                       F.factors[static_cast<std::size_t>(J - 1)],
                                       grams);
    trace.errors.push_back(err);
    trace.sweeps_run = sweep;
    if (std::abs(prev - err) <= cfg.rel_tol * xnorm) {
      trace.converged = true;
      break;
    }
    prev = err;
  }
  return {std::move(F), std::move(trace)};
}

}  // namespace

void AlsConfig::validate() const {
  if (max_sweeps < 1) throw validation_error("max_sweeps must be >= 1");
  if (rel_tol < 0.0) throw validation_error("rel_tol must be >= 0");
  if (restarts < 1) throw validation_error("restarts must be >= 1");
}

FactorSet init_factors(const Shape& shape, Index rank, std::uint64_t seed) {
  if (rank < 1) throw validation_error("rank must be >= 1");
  shape_product(shape);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  FactorSet F;
  F.rank = rank;
  F.factors.reserve(shape.size());
  for (Index n : shape) {
    Matrix& f = F.factors.emplace_back(n, rank);
    for (Index i = 0; i < f.size(); ++i) f.data()[i] = normal(gen);
  }
  return F;
}

Matrix gram_solve(const Matrix& G, const Matrix& C, AlsTrace* trace) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(G);
  const auto& evals = es.eigenvalues();
  const double lmax = evals(evals.size() - 1);
  const double threshold = kPinvThreshold * lmax;
  if (lmax > 0.0 && evals(0) > threshold)
    return G.llt().solve(C.transpose()).transpose();

  if (trace) ++trace->gram_fallbacks;
  if (lmax <= 0.0) return Matrix::Zero(C.rows(), C.cols());
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(evals.size());
  for (Index i = 0; i < evals.size(); ++i)
    if (evals(i) > threshold) inv(i) = 1.0 / evals(i);
  return C * (es.eigenvectors() * inv.asDiagonal() *
              es.eigenvectors().transpose());
}

Matrix ls_update(const Matrix& Xhat_p, const Matrix& K, AlsTrace* trace) {
  if (Xhat_p.rows() != K.rows())
    throw validation_error("ls_update: row counts differ");
  const Matrix G = K.transpose() * K;
  const Matrix C = Xhat_p.transpose() * K;
  return gram_solve(G, C, trace);
}

std::pair<FactorSet, AlsTrace> als_fit(const DenseTensor& X, Index rank,
                                       const AlsConfig& cfg) {
  cfg.validate();
  if (rank < 1) throw validation_error("rank must be >= 1");
  if (!X.all_finite()) throw numeric_error("als_fit: non-finite tensor entry");

  if (X.frobenius_norm() == 0.0) {
    AlsTrace trace;
    trace.errors = {0.0};
    trace.sweeps_run = 1;
    trace.converged = true;
    return {FactorSet::zero(X.shape(), rank), std::move(trace)};
  }

  std::pair<FactorSet, AlsTrace> best;
  double best_err = std::numeric_limits<double>::infinity();
  for (int k = 0; k < cfg.restarts; ++k) {
    auto run = als_run(
        X, init_factors(X.shape(), rank, cfg.seed + static_cast<std::uint64_t>(k)),
        cfg);
    const double err = run.second.errors.back();
    if (err < best_err) {
      best_err = err;
      best = std::move(run);
    }
  }
  return best;
}

std::pair<FactorSet, AlsTrace> als_fit_warm(const DenseTensor& X,
                                            const FactorSet& init,
                                            const AlsConfig& cfg) {
  cfg.validate();
  init.validate();
  if (!X.all_finite()) throw numeric_error("als_fit: non-finite tensor entry");
  if (init.order() != X.order())
    throw validation_error("als_fit_warm: factor count does not match order");
  return als_run(X, init, cfg);
}

}  // namespace mrlr
