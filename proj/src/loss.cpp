#include "plexp/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace plexp {

ExpectileLevel::ExpectileLevel(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("expectile level must lie in (0,1), got " + std::to_string(alpha));
  }
}

double sample_expectile(std::span<const double> values, ExpectileLevel a) {
  if (values.empty()) throw std::domain_error("sample_expectile: empty input");
  double lo = values[0], hi = values[0];
  for (double v : values) {
    if (!std::isfinite(v)) throw std::domain_error("sample_expectile: non-finite value");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo == hi) return lo;

  // m -> sum psi(v - m) is strictly decreasing, positive at lo and negative at hi.
  auto score = [&](double m) {
    double s = 0.0;
    for (double v : values) s += expectile_grad(v - m, a);
    return s;
  };
  const double tol = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (score(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double mean_expectile_loss(const Eigen::VectorXd& residual, ExpectileLevel a) {
  if (residual.size() == 0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < residual.size(); ++i) s += expectile_loss(residual[i], a);
  return s / static_cast<double>(residual.size());
}

double empirical_loss(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                      const Eigen::MatrixXd& Pi, const Eigen::VectorXd& xi, ExpectileLevel a) {
  const auto n = y.size();
  if (X.rows() != n || Pi.rows() != n || X.cols() != beta.size() || Pi.cols() != xi.size()) {
    throw std::domain_error("empirical_loss: dimension mismatch");
  }
  Eigen::VectorXd r = y - Pi * xi;
  if (beta.size() > 0) r -= X * beta;
  return mean_expectile_loss(r, a);
}

}  // namespace plexp
