#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "plexp/dataset.hpp"
#include "plexp/loss.hpp"
#include "plexp/spline.hpp"

namespace testing {

// y = X beta + sin(2 pi z1) + (z2 - 0.5)^2 + noise, X standard normal, Z uniform.
inline plexp::Dataset random_dataset(int n, int p, int d, const Eigen::VectorXd& beta, double noise,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  plexp::Dataset data;
  data.X.resize(n, p);
  data.Z.resize(n, d);
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) data.X(i, j) = nd(rng);
    for (int j = 0; j < d; ++j) data.Z(i, j) = ud(rng);
  }
  for (int i = 0; i < n; ++i) {
    double g = 0.0;
    if (d > 0) g += std::sin(2 * M_PI * data.Z(i, 0));
    if (d > 1) g += (data.Z(i, 1) - 0.5) * (data.Z(i, 1) - 0.5);
    data.y[i] = data.X.row(i).dot(beta) + g + noise * nd(rng);
  }
  return data;
}

// Least squares of y on M by complete orthogonal decomposition (independent of the solver's LLT).
inline Eigen::VectorXd least_squares(const Eigen::MatrixXd& M, const Eigen::VectorXd& y) {
  return M.completeOrthogonalDecomposition().solve(y);
}

inline Eigen::MatrixXd hstack(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd out(A.rows(), A.cols() + B.cols());
  out << A, B;
  return out;
}

// Plain Nelder-Mead with restarts; returns the best vertex.
inline Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                                   double scale, int restarts = 6, int iters = 20000) {
  const auto k = x0.size();
  for (int rs = 0; rs < restarts; ++rs, scale *= 0.3) {
    std::vector<Eigen::VectorXd> s(static_cast<std::size_t>(k + 1), x0);
    for (Eigen::Index j = 0; j < k; ++j) s[static_cast<std::size_t>(j + 1)][j] += scale;
    std::vector<double> fv(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) fv[i] = f(s[i]);
    for (int it = 0; it < iters; ++it) {
      std::vector<std::size_t> ord(s.size());
      std::iota(ord.begin(), ord.end(), 0);
      std::sort(ord.begin(), ord.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
      const std::size_t best = ord.front(), worst = ord.back(), second = ord[ord.size() - 2];
      if (std::abs(fv[worst] - fv[best]) <= 1e-16 * (1 + std::abs(fv[best]))) break;
      Eigen::VectorXd c = Eigen::VectorXd::Zero(k);
      for (std::size_t i = 0; i < s.size(); ++i)
        if (i != worst) c += s[i];
      c /= static_cast<double>(k);
      const Eigen::VectorXd xr = c + (c - s[worst]);
      const double fr = f(xr);
      if (fr < fv[best]) {
        const Eigen::VectorXd xe = c + 2.0 * (c - s[worst]);
        const double fe = f(xe);
        if (fe < fr) {
          s[worst] = xe;
          fv[worst] = fe;
        } else {
          s[worst] = xr;
          fv[worst] = fr;
        }
      } else if (fr < fv[second]) {
        s[worst] = xr;
        fv[worst] = fr;
      } else {
        const Eigen::VectorXd xc = c + 0.5 * (s[worst] - c);
        const double fc = f(xc);
        if (fc < fv[worst]) {
          s[worst] = xc;
          fv[worst] = fc;
        } else {
          for (std::size_t i = 0; i < s.size(); ++i) {
            if (i == best) continue;
            s[i] = s[best] + 0.5 * (s[i] - s[best]);
            fv[i] = f(s[i]);
          }
        }
      }
    }
    x0 = s[static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin())];
  }
  return x0;
}

// (1/n) sum phi(r) by plain loop.
inline double loop_loss(const Eigen::VectorXd& r, double alpha) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) acc += (r[i] < 0 ? 1 - alpha : alpha) * r[i] * r[i];
  return acc / static_cast<double>(r.size());
}

}  // namespace testing
