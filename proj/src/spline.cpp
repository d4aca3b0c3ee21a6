#include "plexp/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace plexp {

void SplineSpec::validate() const {
  if (order < 2) throw std::domain_error("spline order must be >= 2");
  if (internal_knots < 0) throw std::domain_error("internal knot count must be >= 0");
  if (basis_count() < 1) throw std::domain_error("spline basis is empty after the identifiability drop");
}

namespace {

struct Range {
  double lo, hi;
};

Range column_range(const Eigen::VectorXd& z) {
  if (z.size() < 2) throw std::domain_error("spline covariate needs at least 2 observations");
  Range r{z.minCoeff(), z.maxCoeff()};
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) throw std::domain_error("spline covariate has non-finite values");
  if (!(r.hi > r.lo)) throw std::domain_error("spline covariate is constant");
  return r;
}

// Linear-interpolation sample quantile (type 7) of sorted data.
double sorted_quantile(const std::vector<double>& s, double prob) {
  const double h = prob * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace

std::vector<double> make_knots(const Eigen::VectorXd& z_col, const SplineSpec& spec) {
  spec.validate();
  const Range r = column_range(z_col);
  const int k = spec.internal_knots;

  std::vector<double> knots(spec.order, 0.0);
  if (spec.knot_rule == KnotRule::uniform) {
    for (int i = 1; i <= k; ++i) knots.push_back(static_cast<double>(i) / (k + 1));
  } else {
    std::vector<double> t(z_col.size());
    for (Eigen::Index i = 0; i < z_col.size(); ++i) t[i] = (z_col[i] - r.lo) / (r.hi - r.lo);
    std::sort(t.begin(), t.end());
    for (int i = 1; i <= k; ++i) knots.push_back(sorted_quantile(t, static_cast<double>(i) / (k + 1)));
  }
  knots.insert(knots.end(), spec.order, 1.0);
  return knots;
}

Eigen::VectorXd basis_eval(double t, const std::vector<double>& knots, int order) {
  const int m = static_cast<int>(knots.size());
  const int nb = m - order;
  if (order < 1 || nb < 1) throw std::domain_error("basis_eval: knot vector too short for order");
  const int deg = order - 1;
  t = std::clamp(t, knots[deg], knots[nb]);

  // Span index mu with knots[mu] <= t < knots[mu+1], using the last non-empty span at the right end.
  int mu = deg;
  if (t >= knots[nb]) {
    mu = nb - 1;
    while (mu > deg && knots[mu] == knots[mu + 1]) --mu;
  } else {
    mu = static_cast<int>(std::upper_bound(knots.begin(), knots.end(), t) - knots.begin()) - 1;
    mu = std::clamp(mu, deg, nb - 1);
  }

  // Cox-de Boor triangle for the order nonzero functions N_{mu-deg..mu}.
  std::vector<double> N(order, 0.0), left(order),
      right(order);
  N[0] = 1.0;
  for (int j = 1; j <= deg; ++j) {
    left[j] = t - knots[mu + 1 - j];
    right[j] = knots[mu + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom > 0.0 ? N[r] / denom : 0.0;
      N[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    N[j] = saved;
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(nb);
  for (int r = 0; r <= deg; ++r) out[mu - deg + r] = N[r];
  return out;
}

double CovariateBasis::transform(double z) const { return std::clamp((z - lo) / (hi - lo), 0.0, 1.0); }

Eigen::VectorXd CovariateBasis::row(double z) const {
  Eigen::VectorXd raw = basis_eval(transform(z), knots, order);
  if (!drop_first) return raw;
  return raw.tail(raw.size() - 1);
}

int DesignMatrix::block_start(int j) const {
  int start = 1;
  for (int k = 0; k < j; ++k) start += block_size(k);
  return start;
}

Eigen::MatrixXd DesignMatrix::evaluate(const Eigen::MatrixXd& Z) const {
  if (Z.cols() != covariates()) throw std::domain_error("design evaluate: covariate count mismatch");
  int D = 1;
  for (int j = 0; j < covariates(); ++j) D += block_size(j);
  Eigen::MatrixXd out(Z.rows(), D);
  out.col(0).setOnes();
  for (int j = 0; j < covariates(); ++j) {
    const int start = block_start(j), w = block_size(j);
    const auto& b = bases[j];
    for (Eigen::Index i = 0; i < Z.rows(); ++i) out.block(i, start, 1, w) = b.row(Z(i, j)).transpose();
  }
  return out;
}

DesignMatrix build_design(const Eigen::MatrixXd& Z, const SplineSpec& spec) {
  spec.validate();
  if (Z.cols() < 1) throw std::domain_error("build_design: need at least one nonparametric covariate");
  DesignMatrix d;
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    const Eigen::VectorXd col = Z.col(j);
    const Range r = column_range(col);
    d.bases.push_back(CovariateBasis{r.lo, r.hi, make_knots(col, spec), spec.order, spec.drop_first});
  }
  d.Pi = d.evaluate(Z);
  return d;
}

DesignMatrix intercept_design(Eigen::Index n) {
  DesignMatrix d;
  d.Pi = Eigen::MatrixXd::Ones(n, 1);
  return d;
}

CenteredFit center_fit(const Eigen::VectorXd& xi, const DesignMatrix& design) {
  if (xi.size() != design.cols()) throw std::domain_error("center_fit: coefficient length mismatch");
  const auto n = design.rows();
  const int d = design.covariates();
  CenteredFit out;
  out.g.resize(n, d);
  out.offsets.resize(d);
  out.mu = xi[0];
  for (int j = 0; j < d; ++j) {
    const int start = design.block_start(j), w = design.block_size(j);
    Eigen::VectorXd f = design.Pi.middleCols(start, w) * xi.segment(start, w);
    const double m = f.mean();
    out.offsets[j] = m;
    out.g.col(j) = f.array() - m;
    out.mu += m;
  }
  out.g_hat = out.g.rowwise().sum().array() + out.mu;
  return out;
}

}  // namespace plexp
