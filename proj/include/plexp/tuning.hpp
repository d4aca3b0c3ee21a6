#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plexp/dataset.hpp"
#include "plexp/solver.hpp"
#include "plexp/spline.hpp"

namespace plexp {

// Strictly decreasing positive lambda values.
struct LambdaGrid {
  std::vector<double> values;

  // count points from lmax down to eps * lmax, equally spaced on the log scale.
  static LambdaGrid geometric(double lmax, int count = 50, double eps = 0.01);
  void validate() const;
};

// Smallest lambda at which the first L1-weighted step from beta = 0 returns beta = 0.
double lambda_max(const Dataset& data, const DesignMatrix& design, const SolverConfig& config);

struct PathPoint {
  double lambda = 0.0;
  std::optional<FitResult> fit;  // empty when the solve failed
  std::string error;
};

// Fits along the grid (largest lambda first), each warm-started from the previous solution.
// Once a fit has more than config.path_max_active nonzeros (when set) the remaining points are skipped.
std::vector<PathPoint> fit_path(const Dataset& data, const DesignMatrix& design, const LambdaGrid& grid,
                                const SolverConfig& config);

struct ValidationResult {
  double best_lambda = 0.0;
  std::size_t best_index = 0;
  std::vector<double> losses;  // mean tuning-set expectile loss per lambda (+inf for failed fits)
  std::vector<std::size_t> sizes;
  FitResult best_fit;
};

// Picks lambda minimizing the held-out expectile loss; ties go to the larger lambda.
ValidationResult tune_by_validation(const Dataset& train, const DesignMatrix& design, const Dataset& tune_set,
                                    const LambdaGrid& grid, const SolverConfig& config);

struct CvResult {
  double best_lambda = 0.0;
  std::size_t best_index = 0;
  std::vector<std::vector<double>> fold_losses;  // [fold][lambda]
  std::vector<double> mean_losses;
};

// Seeded random assignment of n rows into k near-equal folds.
std::vector<int> make_folds(Eigen::Index n, int k, std::uint64_t seed);

CvResult tune_by_cv(const Dataset& data, const SplineSpec& spline, int k, const LambdaGrid& grid,
                    const SolverConfig& config, std::uint64_t seed);

// Same with an explicit fold label per row (labels 0..k-1).
CvResult tune_by_cv(const Dataset& data, const SplineSpec& spline, const std::vector<int>& folds, int k,
                    const LambdaGrid& grid, const SolverConfig& config);

// Index of the smallest loss, preferring the earlier (larger lambda) entry on ties.
std::size_t argmin_sparser(const std::vector<double>& losses);

}  // namespace plexp
