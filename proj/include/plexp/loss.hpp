#pragma once

#include <algorithm>
#include <span>

#include <Eigen/Dense>

namespace plexp {

// Expectile level alpha in the open interval (0, 1).
class ExpectileLevel {
 public:
  explicit ExpectileLevel(double alpha);

  double value() const noexcept { return alpha_; }
  double c1() const noexcept { return std::min(alpha_, 1.0 - alpha_); }
  double c2() const noexcept { return std::max(alpha_, 1.0 - alpha_); }

  // |alpha - 1{r < 0}|: the asymmetric weight applied to r^2.
  double weight(double r) const noexcept { return r < 0.0 ? 1.0 - alpha_ : alpha_; }

 private:
  double alpha_;
};

// phi_alpha(r) = |alpha - 1{r<0}| r^2
inline double expectile_loss(double r, ExpectileLevel a) noexcept { return a.weight(r) * r * r; }

// psi_alpha(r) = 2 |alpha - 1{r<0}| r
inline double expectile_grad(double r, ExpectileLevel a) noexcept { return 2.0 * a.weight(r) * r; }

// Pointwise curvature used for IRLS weights; the right limit 2*alpha at r = 0.
inline double expectile_curvature(double r, ExpectileLevel a) noexcept { return 2.0 * a.weight(r); }

// Solves sum_i psi_alpha(v_i - m) = 0 by bisection on [min v, max v].
double sample_expectile(std::span<const double> values, ExpectileLevel a);

// (1/n) sum_i phi_alpha(y_i - x_i'beta - Pi_i'xi)
double empirical_loss(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                      const Eigen::MatrixXd& Pi, const Eigen::VectorXd& xi, ExpectileLevel a);

// Mean expectile loss of a residual vector.
double mean_expectile_loss(const Eigen::VectorXd& residual, ExpectileLevel a);

}  // namespace plexp
