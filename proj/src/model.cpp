#include "plexp/model.hpp"

#include <stdexcept>

namespace plexp {

FittedModel FittedModel::from_fit(const FitResult& fit, const DesignMatrix& design, std::vector<std::string> x_names,
                                  std::vector<std::string> z_names) {
  FittedModel m;
  m.x_names = std::move(x_names);
  m.z_names = std::move(z_names);
  m.alpha = fit.config.alpha.value();
  m.beta = fit.beta;
  m.mu = fit.centered.mu;
  m.bases = design.bases;
  m.offsets = fit.centered.offsets;
  for (int j = 0; j < design.covariates(); ++j) {
    m.block_coef.push_back(fit.xi.segment(design.block_start(j), design.block_size(j)));
  }
  return m;
}

double FittedModel::component(int j, double z) const {
  const auto& b = bases.at(static_cast<std::size_t>(j));
  return b.row(z).dot(block_coef[static_cast<std::size_t>(j)]) - offsets[j];
}

Eigen::VectorXd FittedModel::predict(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z, int* clamped) const {
  if (X.cols() != beta.size() || Z.cols() != static_cast<Eigen::Index>(bases.size()) || X.rows() != Z.rows()) {
    throw std::domain_error("predict: covariate dimensions do not match the model");
  }
  int outside = 0;
  Eigen::VectorXd out = X * beta;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double g = mu;
    for (int j = 0; j < static_cast<int>(bases.size()); ++j) {
      if (!bases[static_cast<std::size_t>(j)].in_range(Z(i, j))) ++outside;
      g += component(j, Z(i, j));
    }
    out[i] += g;
  }
  if (clamped) *clamped = outside;
  return out;
}

}  // namespace plexp
