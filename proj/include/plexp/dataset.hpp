#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace plexp {

// Response y, linear covariates X (n x p) and nonparametric covariates Z (n x d).
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  Eigen::MatrixXd Z;
  std::vector<std::string> x_names;
  std::vector<std::string> z_names;

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return X.cols(); }
  Eigen::Index d() const { return Z.cols(); }

  void validate() const {
    if (y.size() == 0) throw std::domain_error("dataset is empty");
    if (X.rows() != y.size() || Z.rows() != y.size()) throw std::domain_error("dataset row counts disagree");
    if (!y.allFinite() || !X.allFinite() || !Z.allFinite()) throw std::domain_error("dataset has non-finite values");
  }

  // Rows selected by index, names carried over.
  Dataset subset(const std::vector<int>& rows) const {
    Dataset out;
    const auto m = static_cast<Eigen::Index>(rows.size());
    out.y.resize(m);
    out.X.resize(m, X.cols());
    out.Z.resize(m, Z.cols());
    for (Eigen::Index k = 0; k < m; ++k) {
      const auto i = rows[static_cast<std::size_t>(k)];
      out.y[k] = y[i];
      out.X.row(k) = X.row(i);
      out.Z.row(k) = Z.row(i);
    }
    out.x_names = x_names;
    out.z_names = z_names;
    return out;
  }
};

}  // namespace plexp
