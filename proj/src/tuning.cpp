#include "plexp/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "plexp/model.hpp"

namespace plexp {

LambdaGrid LambdaGrid::geometric(double lmax, int count, double eps) {
  if (!(lmax > 0.0) || !std::isfinite(lmax)) throw std::domain_error("lambda grid needs lambda_max > 0");
  if (count < 1) throw std::domain_error("lambda grid needs at least one value");
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("lambda grid ratio must lie in (0,1)");
  LambdaGrid g;
  g.values.resize(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    g.values[static_cast<std::size_t>(k)] = lmax * std::pow(eps, frac);
  }
  return g;
}

void LambdaGrid::validate() const {
  if (values.empty()) throw std::domain_error("lambda grid is empty");
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] > 0.0)) throw std::domain_error("lambda grid values must be positive");
    if (k > 0 && !(values[k] < values[k - 1])) throw std::domain_error("lambda grid must be strictly decreasing");
  }
}

double lambda_max(const Dataset& data, const DesignMatrix& design, const SolverConfig& config) {
  data.validate();
  if (data.p() == 0) return 0.0;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(data.p());
  const Eigen::VectorXd xi = fit_nonparametric(data.y, data.X, zero, design, config).coef;
  const Eigen::VectorXd r = data.y - design.Pi * xi;
  Eigen::VectorXd psi(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) psi[i] = expectile_grad(r[i], config.alpha);
  return (data.X.transpose() * psi).lpNorm<Eigen::Infinity>() / static_cast<double>(data.n());
}

std::vector<PathPoint> fit_path(const Dataset& data, const DesignMatrix& design, const LambdaGrid& grid,
                                const SolverConfig& config) {
  grid.validate();
  std::vector<PathPoint> path;
  path.reserve(grid.values.size());
  SolverConfig cfg = config;
  cfg.record_iterates = false;
  bool saturated = false;
  for (double lam : grid.values) {
    PathPoint pt;
    pt.lambda = lam;
    if (saturated) {
      pt.error = "skipped: path saturated";
      path.push_back(std::move(pt));
      continue;
    }
    cfg.penalty = config.penalty.with_lambda(lam);
    try {
      pt.fit = two_step_fit(data, design, cfg);
      cfg.init = InitRule::user;
      cfg.beta_init = pt.fit->beta;
      saturated = config.path_max_active > 0 &&
                  static_cast<int>(pt.fit->active_set.size()) > config.path_max_active;
    } catch (const SolverError& e) {
      pt.error = e.what();
    }
    path.push_back(std::move(pt));
  }
  return path;
}

std::size_t argmin_sparser(const std::vector<double>& losses) {
  if (losses.empty()) throw std::domain_error("argmin over an empty grid");
  std::size_t best = 0;
  for (std::size_t k = 1; k < losses.size(); ++k) {
    if (losses[k] < losses[best]) best = k;
  }
  return best;
}

namespace {

double holdout_loss(const FitResult& fit, const DesignMatrix& design, const Dataset& held, ExpectileLevel a) {
  const FittedModel model = FittedModel::from_fit(fit, design);
  const Eigen::VectorXd pred = model.predict(held.X, held.Z);
  return mean_expectile_loss(held.y - pred, a);
}

}  // namespace

ValidationResult tune_by_validation(const Dataset& train, const DesignMatrix& design, const Dataset& tune_set,
                                    const LambdaGrid& grid, const SolverConfig& config) {
  grid.validate();
  tune_set.validate();
  if (tune_set.p() != train.p() || tune_set.d() != train.d()) throw std::domain_error("tuning set shape mismatch");
  auto path = fit_path(train, design, grid, config);
  ValidationResult res;
  for (const auto& pt : path) {
    if (pt.fit) {
      res.losses.push_back(holdout_loss(*pt.fit, design, tune_set, config.alpha));
      res.sizes.push_back(pt.fit->active_set.size());
    } else {
      res.losses.push_back(std::numeric_limits<double>::infinity());
      res.sizes.push_back(0);
    }
  }
  res.best_index = argmin_sparser(res.losses);
  if (!path[res.best_index].fit) throw SolverError("every fit on the lambda grid failed", "tuning", 0, 0.0, {});
  res.best_lambda = grid.values[res.best_index];
  res.best_fit = std::move(*path[res.best_index].fit);
  return res;
}

std::vector<int> make_folds(Eigen::Index n, int k, std::uint64_t seed) {
  if (k < 2) throw std::domain_error("cross-validation needs k >= 2");
  if (k > n) throw std::domain_error("cross-validation needs k <= n");
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(perm[i], perm[pick(rng)]);
  }
  std::vector<int> folds(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < perm.size(); ++i) folds[static_cast<std::size_t>(perm[i])] = static_cast<int>(i % k);
  return folds;
}

CvResult tune_by_cv(const Dataset& data, const SplineSpec& spline, int k, const LambdaGrid& grid,
                    const SolverConfig& config, std::uint64_t seed) {
  return tune_by_cv(data, spline, make_folds(data.n(), k, seed), k, grid, config);
}

CvResult tune_by_cv(const Dataset& data, const SplineSpec& spline, const std::vector<int>& folds, int k,
                    const LambdaGrid& grid, const SolverConfig& config) {
  grid.validate();
  data.validate();
  if (k < 2) throw std::domain_error("cross-validation needs k >= 2");
  if (k > data.n()) throw std::domain_error("cross-validation needs k <= n");
  if (static_cast<Eigen::Index>(folds.size()) != data.n()) throw std::domain_error("fold labels must cover every row");

  CvResult res;
  res.fold_losses.assign(static_cast<std::size_t>(k), std::vector<double>(grid.values.size()));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));

#pragma omp parallel for schedule(dynamic)
  for (int f = 0; f < k; ++f) {
    try {
      std::vector<int> train_rows, held_rows;
      for (std::size_t i = 0; i < folds.size(); ++i) (folds[i] == f ? held_rows : train_rows).push_back(static_cast<int>(i));
      if (held_rows.empty()) throw std::domain_error("empty cross-validation fold");
      const Dataset train = data.subset(train_rows);
      const Dataset held = data.subset(held_rows);
      const DesignMatrix design = build_design(train.Z, spline);
      auto path = fit_path(train, design, grid, config);
      for (std::size_t g = 0; g < path.size(); ++g) {
        res.fold_losses[static_cast<std::size_t>(f)][g] =
            path[g].fit ? holdout_loss(*path[g].fit, design, held, config.alpha)
                        : std::numeric_limits<double>::infinity();
      }
    } catch (...) {
      errors[static_cast<std::size_t>(f)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  res.mean_losses.assign(grid.values.size(), 0.0);
  for (std::size_t g = 0; g < grid.values.size(); ++g) {
    for (int f = 0; f < k; ++f) res.mean_losses[g] += res.fold_losses[static_cast<std::size_t>(f)][g];
    res.mean_losses[g] /= k;
  }
  res.best_index = argmin_sparser(res.mean_losses);
  res.best_lambda = grid.values[res.best_index];
  return res;
}

}  // namespace plexp
