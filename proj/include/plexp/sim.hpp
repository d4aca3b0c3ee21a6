#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "plexp/dataset.hpp"
#include "plexp/penalty.hpp"
#include "plexp/solver.hpp"
#include "plexp/spline.hpp"

namespace plexp::sim {

// `none` switches the noise off (noiseless signal), used by tests.
enum class ErrorDist { normal, t5, none };

std::string_view to_string(ErrorDist e);
ErrorDist parse_error_dist(std::string_view name);

struct ScenarioSpec {
  int n = 300;
  int p = 400;
  ErrorDist error = ErrorDist::normal;
  bool heteroscedastic = true;
  double hetero_scale = 0.70;
  std::vector<double> alphas{0.10, 0.50, 0.90};
  std::vector<PenaltyFamily> penalties{PenaltyFamily::scad, PenaltyFamily::l1};
  bool oracle = true;
  int replications = 50;
  std::uint64_t seed = 20240101;
  int tune_factor = 10;  // tuning set size = tune_factor * n
  int grid_size = 50;
  double grid_eps = 0.01;
  double max_active_fraction = 0.5;  // path stops once a fit has more than this fraction of n nonzeros
  SplineSpec spline{};

  void validate() const;
};

// Named scenario presets: table1-normal, table1-t5, table2-normal, table2-t5.
ScenarioSpec preset(std::string_view name);
std::vector<std::string> preset_names();

// 1-based indices of the nonzero coefficients in the generating model.
inline constexpr int kActive[4] = {6, 12, 15, 20};

struct Covariates {
  Eigen::MatrixXd X;  // n x p
  Eigen::MatrixXd Z;  // n x 2, values in (0,1)
};

// Rows of x~ ~ N_{p+2}(0, Sigma), Sigma_ij = 0.5^|i-j|, mapped to (x, z).
Covariates gen_covariates(int n, int p, std::uint64_t seed);

struct Truth {
  Eigen::VectorXd beta;  // ones at kActive
  Eigen::VectorXd g0;    // sin(2 pi z1) + z2^3 at each row
};

struct Simulated {
  Dataset data;
  Truth truth;
};

Simulated gen_response(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z, const ScenarioSpec& scenario,
                       std::uint64_t seed);

struct ReplicationMetrics {
  double ae = 0.0;
  double se = 0.0;
  double ade = 0.0;
  int size = 0;
  bool all_actives = false;
  bool x1 = false;
  double lambda = 0.0;  // selected lambda (0 for the oracle)
};

ReplicationMetrics compute_metrics(const FitResult& fit, const Truth& truth);

struct Aggregate {
  int count = 0;
  double ae_mean = 0, ae_sd = 0, se_mean = 0, se_sd = 0, ade_mean = 0, ade_sd = 0, size_mean = 0, size_sd = 0;
  double f_pct = 0, f1_pct = 0;
};

Aggregate aggregate(const std::vector<ReplicationMetrics>& reps);

struct MethodResult {
  std::string method;  // E-SCAD, E-MCP, E-Lasso, Oracle
  bool selects = true; // false for the oracle (no Size / F columns)
  std::vector<ReplicationMetrics> reps;
  std::vector<int> failed_reps;
  Aggregate summary;
};

struct AlphaResult {
  double alpha = 0.5;
  std::vector<MethodResult> methods;
};

struct ExperimentReport {
  ScenarioSpec scenario;
  std::vector<AlphaResult> results;
  int failures = 0;
};

std::string method_name(PenaltyFamily f);

// Seed of replication r: base + r. Sub-streams (train/tune covariates, noise) are derived from it.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Train and tuning sets of one replication.
struct Replication {
  Simulated train;
  Simulated tune;
};
Replication make_replication(const ScenarioSpec& scenario, int rep);

// 0-based support of the alpha-expectile regression: kActive, plus x1 when the errors are
// heteroscedastic and alpha != 0.5 (the error expectile is then nonzero and scales with x1).
std::vector<int> oracle_active(const ScenarioSpec& scenario, double alpha);

ExperimentReport run_experiment(const ScenarioSpec& scenario, const SolverConfig& base);

// Cholesky factor of the AR(1) correlation matrix rho^|i-j| and the dense sampler it defines.
Eigen::MatrixXd ar1_correlation(int dim, double rho);
Eigen::VectorXd ar1_apply_factor(const Eigen::VectorXd& normals, double rho);

}  // namespace plexp::sim
