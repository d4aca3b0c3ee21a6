#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plexp/dataset.hpp"
#include "plexp/loss.hpp"
#include "plexp/penalty.hpp"
#include "plexp/spline.hpp"

namespace plexp {

enum class InitRule { zero, elasso, user };

struct SolverConfig {
  ExpectileLevel alpha{0.5};
  PenaltySpec penalty = PenaltySpec::unpenalized();
  int max_outer = 50;
  int max_inner = 2000;
  double tol_outer = 1e-6;  // max-norm change in beta and relative objective change
  double tol_inner = 1e-8;  // KKT residual of the inner problems
  double ridge_eps = 1e-10;
  InitRule init = InitRule::elasso;
  Eigen::VectorXd beta_init;  // read when init == user
  int lla_passes = 1;         // weight updates per outer iteration
  bool record_iterates = false;
  int path_max_active = 0;    // fit_path stops after a fit with more nonzeros than this (0: never)

  void validate() const;
};

// Raised when an inner solve stops without meeting its tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::string stage, int iterations, double residual, Eigen::VectorXd last)
      : std::runtime_error(what),
        stage(std::move(stage)),
        iterations(iterations),
        residual(residual),
        last_iterate(std::move(last)) {}

  std::string stage;
  int iterations;
  double residual;
  Eigen::VectorXd last_iterate;
};

// One outer iteration: xi from step (a), the LLA weights and the beta from step (b).
struct OuterIterate {
  Eigen::VectorXd xi;
  Eigen::VectorXd weights;
  Eigen::VectorXd beta;
  int inner_iterations = 0;
};

struct FitResult {
  Eigen::VectorXd beta;
  Eigen::VectorXd xi;
  CenteredFit centered;
  Eigen::VectorXd fitted;  // x_i'beta + Pi_i'xi
  std::vector<double> objective_trace;
  int outer_iters = 0;
  bool converged = false;
  bool ridge_fallback = false;
  double kkt_max_residual = 0.0;
  std::vector<int> active_set;
  SolverConfig config;
  std::vector<OuterIterate> iterates;
};

struct InnerSolve {
  Eigen::VectorXd coef;
  int iterations = 0;
  double residual = 0.0;  // max gradient (step a) or KKT (step b) residual at return
  bool line_search = false;
};

// Step (a): argmin_xi (1/n) sum phi(y - X beta - Pi xi) by IRLS.
InnerSolve fit_nonparametric(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                             const DesignMatrix& design, const SolverConfig& config,
                             const std::optional<Eigen::VectorXd>& xi_start = std::nullopt);

// Step (b): argmin_beta (1/n) sum phi(y - Pi xi - X beta) + sum_j w_j |beta_j|.
InnerSolve fit_linear_lla(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const Eigen::VectorXd& xi,
                          const DesignMatrix& design, const Eigen::VectorXd& weights, const SolverConfig& config,
                          const std::optional<Eigen::VectorXd>& beta_start = std::nullopt);

// Penalized objective L(beta, xi).
double penalized_objective(const Dataset& data, const DesignMatrix& design, const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& xi, ExpectileLevel alpha, const PenaltySpec& penalty);

// Alternating two-step algorithm with LLA weights.
FitResult two_step_fit(const Dataset& data, const DesignMatrix& design, const SolverConfig& config);

// Unpenalized joint fit with beta restricted to the given index set.
FitResult oracle_fit(const Dataset& data, const DesignMatrix& design, const std::vector<int>& active,
                     const SolverConfig& config);

enum class KktStatus { stationary, active_stationary, violating };

struct KktReport {
  Eigen::VectorXd s;           // d L_n / d beta_j
  Eigen::VectorXd xi_grad;     // d L_n / d xi_l
  Eigen::VectorXd beta_residual;
  std::vector<KktStatus> status;
  double max_beta = 0.0;
  double max_xi = 0.0;
  double max_residual = 0.0;
};

// Subgradient optimality check of (beta, xi) for weights w:
// beta_j != 0 needs |s_j + w_j sgn(beta_j)| <= tol, beta_j == 0 needs |s_j| <= w_j + tol.
KktReport kkt_report(const Dataset& data, const DesignMatrix& design, const Eigen::VectorXd& beta,
                     const Eigen::VectorXd& xi, ExpectileLevel alpha, const Eigen::VectorXd& weights, double tol);

// Check of a fit against its own penalty, with weights P'(|beta_j|) and P'(0) = lambda.
KktReport kkt_report(const FitResult& fit, const Dataset& data, const DesignMatrix& design, double tol);

}  // namespace plexp
