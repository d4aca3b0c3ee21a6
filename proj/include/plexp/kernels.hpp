#pragma once

#include <span>

#include <Eigen/Dense>

#include "plexp/loss.hpp"

// Data-parallel inner loops of the solvers. Each kernel has a plain serial
// reference and an OpenMP version. The OpenMP versions partition work so
// that results do not depend on the thread count.
namespace plexp::kernels {

namespace serial {

// out[k] = X.col(cols[k]) . v
void column_dots(const Eigen::MatrixXd& X, std::span<const int> cols, const Eigen::VectorXd& v, Eigen::VectorXd& out);

// out = sum_k coef[k] * X.col(cols[k])
void column_combination(const Eigen::MatrixXd& X, std::span<const int> cols, const Eigen::VectorXd& coef,
                        Eigen::VectorXd& out);

// psi[i] = psi_alpha(r[i]); returns sum_i phi_alpha(r[i]).
double expectile_terms(const Eigen::VectorXd& r, ExpectileLevel a, Eigen::VectorXd& psi);

}  // namespace serial

namespace omp {

void column_dots(const Eigen::MatrixXd& X, std::span<const int> cols, const Eigen::VectorXd& v, Eigen::VectorXd& out);
void column_combination(const Eigen::MatrixXd& X, std::span<const int> cols, const Eigen::VectorXd& coef,
                        Eigen::VectorXd& out);
double expectile_terms(const Eigen::VectorXd& r, ExpectileLevel a, Eigen::VectorXd& psi);

}  // namespace omp

// Fixed block length of the deterministic reduction in omp::expectile_terms.
inline constexpr Eigen::Index kReductionBlock = 512;

}  // namespace plexp::kernels
