#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plexp/solver.hpp"
#include "plexp/spline.hpp"

namespace plexp {

// A fit reduced to what prediction needs: x'beta + mu + sum_j g_j(z_j),
// where g_j(z) = pi_j(z)'xi_j - offset_j.
struct FittedModel {
  std::vector<std::string> x_names;
  std::vector<std::string> z_names;
  double alpha = 0.5;
  Eigen::VectorXd beta;
  double mu = 0.0;
  std::vector<CovariateBasis> bases;
  std::vector<Eigen::VectorXd> block_coef;
  Eigen::VectorXd offsets;

  static FittedModel from_fit(const FitResult& fit, const DesignMatrix& design, std::vector<std::string> x_names = {},
                              std::vector<std::string> z_names = {});

  // g_j evaluated at z (clamped into the training range).
  double component(int j, double z) const;

  // Predicted alpha-expectile for each row. Counts z values outside the training range in *clamped.
  Eigen::VectorXd predict(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z, int* clamped = nullptr) const;
};

}  // namespace plexp
