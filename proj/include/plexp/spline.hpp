#pragma once

#include <vector>

#include <Eigen/Dense>

namespace plexp {

enum class KnotRule { uniform, quantile };

struct SplineSpec {
  int order = 4;           // polynomial degree + 1
  int internal_knots = 0;  // k_n
  KnotRule knot_rule = KnotRule::uniform;
  bool drop_first = true;  // drop one basis per covariate for identifiability with the intercept

  int raw_basis_count() const { return internal_knots + order; }
  int basis_count() const { return raw_basis_count() - (drop_first ? 1 : 0); }
  void validate() const;
};

// Clamped knot vector on [0,1] built from a covariate column.
// The column is first mapped affinely from [min, max] onto [0,1].
std::vector<double> make_knots(const Eigen::VectorXd& z_col, const SplineSpec& spec);

// Normalized B-spline values at t (clamped into [0,1]); length knots.size() - order.
Eigen::VectorXd basis_eval(double t, const std::vector<double>& knots, int order);

// One nonparametric covariate: the affine map onto [0,1] and its knots.
struct CovariateBasis {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> knots;
  int order = 4;
  bool drop_first = true;

  double transform(double z) const;
  bool in_range(double z) const { return z >= lo && z <= hi; }
  int basis_count() const { return static_cast<int>(knots.size()) - order - (drop_first ? 1 : 0); }
  // Row of the design block for one value (after the identifiability drop).
  Eigen::VectorXd row(double z) const;
};

// Pi(z): leading intercept column followed by one spline block per covariate.
struct DesignMatrix {
  Eigen::MatrixXd Pi;
  std::vector<CovariateBasis> bases;

  Eigen::Index rows() const { return Pi.rows(); }
  Eigen::Index cols() const { return Pi.cols(); }
  int covariates() const { return static_cast<int>(bases.size()); }
  int block_start(int j) const;
  int block_size(int j) const { return bases[static_cast<std::size_t>(j)].basis_count(); }

  // Pi rows for new data using the stored transforms (values outside the training range clamp).
  Eigen::MatrixXd evaluate(const Eigen::MatrixXd& Z) const;
};

DesignMatrix build_design(const Eigen::MatrixXd& Z, const SplineSpec& spec);

// Design holding only the intercept column (used for the linear-only initial fit).
DesignMatrix intercept_design(Eigen::Index n);

struct CenteredFit {
  double mu = 0.0;
  Eigen::MatrixXd g;            // n x d, column j holds g_j(z_ij) with sample mean 0
  Eigen::VectorXd g_hat;        // mu + sum_j g_j(z_ij)
  Eigen::VectorXd offsets;      // per-covariate sample means removed from each block
};

CenteredFit center_fit(const Eigen::VectorXd& xi, const DesignMatrix& design);

}  // namespace plexp
