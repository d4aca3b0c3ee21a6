#include "plexp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "plexp/kernels.hpp"

namespace plexp {

void SolverConfig::validate() const {
  penalty.validate();
  if (max_outer < 1 || max_inner < 1 || lla_passes < 1) throw std::domain_error("iteration limits must be >= 1");
  if (path_max_active < 0) throw std::domain_error("path_max_active must be >= 0");
  if (!(tol_outer > 0.0) || !(tol_inner > 0.0)) throw std::domain_error("tolerances must be > 0");
  if (!(ridge_eps > 0.0)) throw std::domain_error("ridge_eps must be > 0");
}

namespace {

double sgn(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

std::vector<int> nonzero_indices(const Eigen::VectorXd& v) {
  std::vector<int> idx;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (v[j] != 0.0) idx.push_back(static_cast<int>(j));
  }
  return idx;
}

// X * beta using only the nonzero coefficients.
Eigen::VectorXd sparse_product(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta) {
  const auto idx = nonzero_indices(beta);
  Eigen::VectorXd coef(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) coef[static_cast<Eigen::Index>(k)] = beta[idx[k]];
  Eigen::VectorXd out;
  kernels::omp::column_combination(X, idx, coef, out);
  return out;
}

// ---------------------------------------------------------------------------
// IRLS for argmin_theta (1/n) sum phi(target - M theta).

struct IrlsOutcome {
  Eigen::VectorXd theta;
  int iterations = 0;
  double grad_max = 0.0;
  bool converged = false;
  bool line_search = false;
  bool ridge = false;
};

double mean_loss(const Eigen::VectorXd& target, const Eigen::MatrixXd& M, const Eigen::VectorXd& theta,
                 ExpectileLevel a) {
  return mean_expectile_loss(target - M * theta, a);
}

IrlsOutcome irls(const Eigen::VectorXd& target, const Eigen::MatrixXd& M, ExpectileLevel a, double ridge_eps,
                 double tol, int max_iter, Eigen::VectorXd theta) {
  const auto n = static_cast<double>(target.size());
  const auto k = M.cols();
  IrlsOutcome out;
  std::set<std::vector<bool>> seen;
  std::vector<bool> pattern(static_cast<std::size_t>(target.size()));

  for (int it = 0;; ++it) {
    const Eigen::VectorXd r = target - M * theta;
    Eigen::VectorXd psi(r.size()), w(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      psi[i] = expectile_grad(r[i], a);
      w[i] = expectile_curvature(r[i], a);
    }
    const Eigen::VectorXd grad = -(M.transpose() * psi) / n;
    out.grad_max = k > 0 ? grad.lpNorm<Eigen::Infinity>() : 0.0;
    out.iterations = it;
    if (out.grad_max <= tol) {
      out.converged = true;
      break;
    }
    if (it >= max_iter) break;

    const Eigen::MatrixXd WM = w.asDiagonal() * M;
    const Eigen::MatrixXd H = (M.transpose() * WM) / n;
    const Eigen::VectorXd b = (WM.transpose() * target) / n;
    Eigen::VectorXd next;
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() == Eigen::Success) {
      next = llt.solve(b);
    } else {
      // Rank-deficient system: ridge, then one refinement step against the unregularized matrix.
      out.ridge = true;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(H + ridge_eps * Eigen::MatrixXd::Identity(k, k));
      next = ldlt.solve(b);
      next += ldlt.solve(b - H * next);
    }
    if (!next.allFinite()) break;

    if (!out.line_search) {
      for (Eigen::Index i = 0; i < r.size(); ++i) pattern[static_cast<std::size_t>(i)] = r[i] < 0.0;
      if (!seen.insert(pattern).second) out.line_search = true;  // sign pattern revisited: cycling
    }
    if (!out.line_search) {
      theta = std::move(next);
      continue;
    }

    // Armijo backtracking along the IRLS direction.
    Eigen::VectorXd dir = next - theta;
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      dir = -grad;
      slope = -grad.squaredNorm();
    }
    const double f0 = mean_expectile_loss(r, a);
    double step = 1.0;
    for (int h = 0; h < 60; ++h, step *= 0.5) {
      if (mean_loss(target, M, theta + step * dir, a) <= f0 + 1e-4 * step * slope) break;
    }
    theta += step * dir;
  }
  out.theta = std::move(theta);
  return out;
}

// ---------------------------------------------------------------------------
// Weighted-L1 expectile regression by working-set accelerated proximal gradient.

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

double kkt_coord(double beta, double s, double w) {
  if (beta != 0.0) return std::abs(s + w * sgn(beta));
  return std::max(0.0, std::abs(s) - w);
}

// Largest eigenvalue of X_W' X_W by power iteration.
double gram_spectral_norm(const Eigen::MatrixXd& X, std::span<const int> cols) {
  const auto m = static_cast<Eigen::Index>(cols.size());
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m) / std::sqrt(static_cast<double>(m));
  Eigen::VectorXd xv, g;
  double est = 0.0;
  for (int it = 0; it < 30; ++it) {
    kernels::omp::column_combination(X, cols, v, xv);
    kernels::omp::column_dots(X, cols, xv, g);
    const double norm = g.norm();
    if (norm == 0.0) return 0.0;
    const double prev = est;
    est = norm;
    v = g / norm;
    if (std::abs(est - prev) <= 1e-3 * est) break;
  }
  return est;
}

struct SubproblemOutcome {
  Eigen::VectorXd b;
  Eigen::VectorXd r;  // offset - X_W b
  int iterations = 0;
  double kkt = 0.0;
  bool converged = false;
};

SubproblemOutcome fista(const Eigen::VectorXd& offset, const Eigen::MatrixXd& X, std::span<const int> cols,
                        const Eigen::VectorXd& w, Eigen::VectorXd x, ExpectileLevel a, double tol, int max_iter) {
  const auto n = static_cast<double>(offset.size());
  const auto m = static_cast<Eigen::Index>(cols.size());
  SubproblemOutcome out;

  Eigen::VectorXd tmp, psi, grad;
  auto residual_of = [&](const Eigen::VectorXd& b) {
    kernels::omp::column_combination(X, cols, b, tmp);
    return Eigen::VectorXd(offset - tmp);
  };
  auto l1 = [&](const Eigen::VectorXd& b) { return w.cwiseProduct(b.cwiseAbs()).sum(); };
  auto kkt_at = [&](const Eigen::VectorXd& b, const Eigen::VectorXd& g) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) worst = std::max(worst, kkt_coord(b[j], g[j], w[j]));
    return worst;
  };

  double L = 2.0 * a.c2() / n * gram_spectral_norm(X, cols);
  if (!(L > 0.0)) L = 1.0;

  Eigen::VectorXd rx = residual_of(x);
  double fx = kernels::omp::expectile_terms(rx, a, psi) / n;
  kernels::omp::column_dots(X, cols, psi, grad);
  grad /= -n;
  out.kkt = kkt_at(x, grad);
  if (out.kkt <= tol) {
    out.b = std::move(x);
    out.r = std::move(rx);
    out.converged = true;
    return out;
  }
  double Fx = fx + l1(x);

  Eigen::VectorXd y = x, ry = rx, gy = grad, xn(m), d(m), rn, gn;
  double fy = fx, t = 1.0;
  int since_refresh = 0;
  for (int k = 1; k <= max_iter; ++k) {
    out.iterations = k;
    double fn = 0.0;
    for (;;) {
      for (Eigen::Index j = 0; j < m; ++j) xn[j] = soft_threshold(y[j] - gy[j] / L, w[j] / L);
      d = xn - y;
      kernels::omp::column_combination(X, cols, d, tmp);
      rn = ry - tmp;
      fn = kernels::omp::expectile_terms(rn, a, psi) / n;
      const double model = fy + gy.dot(d) + 0.5 * L * d.squaredNorm();
      if (fn <= model + 1e-12 * std::abs(fy) || d.lpNorm<Eigen::Infinity>() == 0.0) break;
      L *= 2.0;
      if (!std::isfinite(L)) break;
    }
    const double Fn = fn + l1(xn);
    if (Fn > Fx && t > 1.0) {
      // function-value restart; plain proximal steps are always accepted
      t = 1.0;
      y = x;
      ry = rx;
      kernels::omp::expectile_terms(ry, a, psi);
      kernels::omp::column_dots(X, cols, psi, gy);
      gy /= -n;
      fy = fx;
      continue;
    }
    kernels::omp::column_dots(X, cols, psi, gn);
    gn /= -n;
    out.kkt = kkt_at(xn, gn);

    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double mom = (t - 1.0) / tn;
    if (++since_refresh >= 100) {
      rn = residual_of(xn);
      since_refresh = 0;
    }
    y = xn + mom * (xn - x);
    ry = rn + mom * (rn - rx);
    x = xn;
    rx = rn;
    fx = fn;
    Fx = Fn;
    t = tn;
    if (out.kkt <= tol) {
      out.converged = true;
      break;
    }
    if (mom == 0.0) {
      gy = gn;
      fy = fn;
    } else {
      fy = kernels::omp::expectile_terms(ry, a, psi) / n;
      kernels::omp::column_dots(X, cols, psi, gy);
      gy /= -n;
    }
  }
  out.r = residual_of(x);
  if (!out.converged) {
    kernels::omp::expectile_terms(out.r, a, psi);
    kernels::omp::column_dots(X, cols, psi, grad);
    grad /= -n;
    out.kkt = kkt_at(x, grad);
    out.converged = out.kkt <= tol;
  }
  out.b = std::move(x);
  return out;
}

InnerSolve weighted_l1_fit(const Eigen::VectorXd& offset, const Eigen::MatrixXd& X, const Eigen::VectorXd& weights,
                           ExpectileLevel a, double tol, int max_inner, Eigen::VectorXd beta) {
  const auto n = static_cast<double>(offset.size());
  const auto p = X.cols();
  InnerSolve out;
  if (p == 0) {
    out.coef = beta;
    return out;
  }
  std::vector<int> all(static_cast<std::size_t>(p));
  std::iota(all.begin(), all.end(), 0);

  Eigen::VectorXd r = offset - sparse_product(X, beta);
  Eigen::VectorXd psi, s;
  auto full_gradient = [&]() {
    kernels::omp::expectile_terms(r, a, psi);
    kernels::omp::column_dots(X, all, psi, s);
    s /= -n;
  };
  full_gradient();

  std::vector<char> in_set(static_cast<std::size_t>(p), 0);
  std::vector<int> work;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (beta[j] != 0.0) {
      in_set[static_cast<std::size_t>(j)] = 1;
      work.push_back(static_cast<int>(j));
    }
  }

  for (int round = 0;; ++round) {
    // Coordinates outside the working set that violate |s_j| <= w_j, strongest first.
    std::vector<std::pair<double, int>> viol;
    double worst_outside = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (in_set[static_cast<std::size_t>(j)]) continue;
      const double v = std::abs(s[j]) - weights[j];
      worst_outside = std::max(worst_outside, v);
      if (v > tol) viol.emplace_back(v, static_cast<int>(j));
    }
    if (viol.empty() && round > 0) break;
    std::sort(viol.begin(), viol.end(), [](const auto& l, const auto& rgt) {
      return l.first != rgt.first ? l.first > rgt.first : l.second < rgt.second;
    });
    const std::size_t add = std::min(viol.size(), std::max<std::size_t>(10, work.size()));
    for (std::size_t k = 0; k < add; ++k) {
      in_set[static_cast<std::size_t>(viol[k].second)] = 1;
      work.push_back(viol[k].second);
    }
    std::sort(work.begin(), work.end());
    if (work.empty()) break;

    Eigen::VectorXd bw(static_cast<Eigen::Index>(work.size())), ww(bw.size());
    for (std::size_t k = 0; k < work.size(); ++k) {
      bw[static_cast<Eigen::Index>(k)] = beta[work[k]];
      ww[static_cast<Eigen::Index>(k)] = weights[work[k]];
    }
    SubproblemOutcome sub = fista(offset, X, work, ww, bw, a, tol, max_inner);
    out.iterations += sub.iterations;
    if (!sub.converged) {
      for (std::size_t k = 0; k < work.size(); ++k) beta[work[k]] = sub.b[static_cast<Eigen::Index>(k)];
      throw SolverError("weighted-L1 solve did not reach KKT tolerance", "linear", out.iterations, sub.kkt, beta);
    }
    for (std::size_t k = 0; k < work.size(); ++k) beta[work[k]] = sub.b[static_cast<Eigen::Index>(k)];
    r = std::move(sub.r);
    full_gradient();
    out.residual = sub.kkt;
  }

  double worst = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) worst = std::max(worst, kkt_coord(beta[j], s[j], weights[j]));
  out.residual = worst;
  out.coef = std::move(beta);
  return out;
}

Eigen::VectorXd initial_beta(const Dataset& data, const SolverConfig& config) {
  const auto p = data.p();
  switch (config.init) {
    case InitRule::zero:
      return Eigen::VectorXd::Zero(p);
    case InitRule::user:
      if (config.beta_init.size() != p) throw std::domain_error("user-supplied beta_init has wrong length");
      return config.beta_init;
    case InitRule::elasso: {
      if (config.penalty.family == PenaltyFamily::none || config.penalty.lambda == 0.0) return Eigen::VectorXd::Zero(p);
      // L1 fit of y on X with an unpenalized intercept only.
      SolverConfig sub = config;
      sub.penalty = PenaltySpec::l1(config.penalty.lambda);
      sub.init = InitRule::zero;
      sub.record_iterates = false;
      return two_step_fit(data, intercept_design(data.n()), sub).beta;
    }
  }
  return Eigen::VectorXd::Zero(p);
}

}  // namespace

InnerSolve fit_nonparametric(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                             const DesignMatrix& design, const SolverConfig& config,
                             const std::optional<Eigen::VectorXd>& xi_start) {
  if (X.rows() != y.size() || design.rows() != y.size() || X.cols() != beta.size()) {
    throw std::domain_error("fit_nonparametric: dimension mismatch");
  }
  const Eigen::VectorXd target = y - sparse_product(X, beta);
  Eigen::VectorXd start = xi_start.value_or(Eigen::VectorXd::Zero(design.cols()));
  if (start.size() != design.cols()) throw std::domain_error("fit_nonparametric: xi_start has wrong length");
  IrlsOutcome o = irls(target, design.Pi, config.alpha, config.ridge_eps, config.tol_inner, config.max_inner, start);
  if (!o.converged) {
    throw SolverError("IRLS did not converge for the nonparametric part", "nonparametric", o.iterations, o.grad_max,
                      o.theta);
  }
  return {std::move(o.theta), o.iterations, o.grad_max, o.line_search};
}

InnerSolve fit_linear_lla(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const Eigen::VectorXd& xi,
                          const DesignMatrix& design, const Eigen::VectorXd& weights, const SolverConfig& config,
                          const std::optional<Eigen::VectorXd>& beta_start) {
  if (X.rows() != y.size() || design.rows() != y.size() || design.cols() != xi.size() || weights.size() != X.cols()) {
    throw std::domain_error("fit_linear_lla: dimension mismatch");
  }
  if ((weights.array() < 0.0).any()) throw std::domain_error("fit_linear_lla: negative weight");
  Eigen::VectorXd start = beta_start.value_or(Eigen::VectorXd::Zero(X.cols()));
  if (start.size() != X.cols()) throw std::domain_error("fit_linear_lla: beta_start has wrong length");
  const Eigen::VectorXd offset = y - design.Pi * xi;
  return weighted_l1_fit(offset, X, weights, config.alpha, config.tol_inner, config.max_inner, std::move(start));
}

double penalized_objective(const Dataset& data, const DesignMatrix& design, const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& xi, ExpectileLevel alpha, const PenaltySpec& penalty) {
  const Eigen::VectorXd r = data.y - design.Pi * xi - sparse_product(data.X, beta);
  return mean_expectile_loss(r, alpha) + total_penalty(beta, penalty);
}

namespace {

void finalize(FitResult& fit, const Dataset& data, const DesignMatrix& design, const Eigen::VectorXd& weights) {
  fit.active_set = nonzero_indices(fit.beta);
  fit.centered = center_fit(fit.xi, design);
  fit.fitted = design.Pi * fit.xi + sparse_product(data.X, fit.beta);
  fit.kkt_max_residual =
      kkt_report(data, design, fit.beta, fit.xi, fit.config.alpha, weights, fit.config.tol_inner).max_residual;
}

}  // namespace

FitResult two_step_fit(const Dataset& data, const DesignMatrix& design, const SolverConfig& config) {
  config.validate();
  data.validate();
  if (design.rows() != data.n()) throw std::domain_error("two_step_fit: design rows do not match data");

  FitResult fit;
  fit.config = config;
  Eigen::VectorXd beta = initial_beta(data, config);

  auto step_a = [&](const Eigen::VectorXd& b, const std::optional<Eigen::VectorXd>& warm) {
    try {
      return fit_nonparametric(data.y, data.X, b, design, config, warm).coef;
    } catch (SolverError& e) {
      throw SolverError(std::string(e.what()) + " (outer iteration " + std::to_string(fit.outer_iters) + ")",
                        e.stage, e.iterations, e.residual, e.last_iterate);
    }
  };

  Eigen::VectorXd xi = step_a(beta, std::nullopt);
  fit.objective_trace.push_back(penalized_objective(data, design, beta, xi, config.alpha, config.penalty));
  Eigen::VectorXd weights = lla_weights(beta, config.penalty);

  for (int t = 1; t <= config.max_outer; ++t) {
    fit.outer_iters = t;
    if (t > 1) xi = step_a(beta, xi);
    Eigen::VectorXd next = beta;
    int inner = 0;
    for (int pass = 0; pass < config.lla_passes; ++pass) {
      weights = lla_weights(next, config.penalty);
      try {
        InnerSolve s = fit_linear_lla(data.y, data.X, xi, design, weights, config, next);
        inner += s.iterations;
        next = std::move(s.coef);
      } catch (SolverError& e) {
        throw SolverError(std::string(e.what()) + " (outer iteration " + std::to_string(t) + ")", e.stage,
                          e.iterations, e.residual, e.last_iterate);
      }
    }
    if (config.record_iterates) fit.iterates.push_back({xi, weights, next, inner});

    const double obj = penalized_objective(data, design, next, xi, config.alpha, config.penalty);
    const double prev = fit.objective_trace.back();
    fit.objective_trace.push_back(obj);
    const double change = data.p() > 0 ? (next - beta).lpNorm<Eigen::Infinity>() : 0.0;
    beta = std::move(next);
    if (change < config.tol_outer && std::abs(prev - obj) / std::max(1.0, std::abs(prev)) < config.tol_outer) {
      fit.converged = true;
      break;
    }
  }

  // Refit the nonparametric part at the final beta.
  xi = step_a(beta, xi);
  fit.objective_trace.push_back(penalized_objective(data, design, beta, xi, config.alpha, config.penalty));
  fit.beta = std::move(beta);
  fit.xi = std::move(xi);
  finalize(fit, data, design, weights);
  return fit;
}

FitResult oracle_fit(const Dataset& data, const DesignMatrix& design, const std::vector<int>& active,
                     const SolverConfig& config) {
  config.validate();
  data.validate();
  const auto q = static_cast<Eigen::Index>(active.size());
  const auto D = design.cols();
  if (q + D >= data.n()) throw std::domain_error("oracle_fit: |active| + D_n must be smaller than n");

  Eigen::MatrixXd M(data.n(), q + D);
  for (Eigen::Index k = 0; k < q; ++k) {
    const int j = active[static_cast<std::size_t>(k)];
    if (j < 0 || j >= data.p()) throw std::domain_error("oracle_fit: active index out of range");
    M.col(k) = data.X.col(j);
  }
  M.rightCols(D) = design.Pi;
  IrlsOutcome o = irls(data.y, M, config.alpha, config.ridge_eps, config.tol_inner, config.max_inner,
                       Eigen::VectorXd::Zero(q + D));
  if (!o.converged) throw SolverError("oracle IRLS did not converge", "oracle", o.iterations, o.grad_max, o.theta);

  FitResult fit;
  fit.config = config;
  fit.config.penalty = PenaltySpec::unpenalized();
  fit.beta = Eigen::VectorXd::Zero(data.p());
  for (Eigen::Index k = 0; k < q; ++k) fit.beta[active[static_cast<std::size_t>(k)]] = o.theta[k];
  fit.xi = o.theta.tail(D);
  fit.outer_iters = 1;
  fit.converged = true;
  fit.ridge_fallback = o.ridge;
  fit.objective_trace.push_back(
      penalized_objective(data, design, fit.beta, fit.xi, config.alpha, PenaltySpec::unpenalized()));
  finalize(fit, data, design, Eigen::VectorXd::Zero(data.p()));
  return fit;
}

KktReport kkt_report(const Dataset& data, const DesignMatrix& design, const Eigen::VectorXd& beta,
                     const Eigen::VectorXd& xi, ExpectileLevel alpha, const Eigen::VectorXd& weights, double tol) {
  const auto n = data.n(), p = data.p(), D = design.cols();
  if (beta.size() != p || xi.size() != D || weights.size() != p) throw std::domain_error("kkt_report: size mismatch");

  // Plain loops, independent of the solver kernels.
  Eigen::VectorXd psi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double fit = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (beta[j] != 0.0) fit += data.X(i, j) * beta[j];
    }
    for (Eigen::Index l = 0; l < D; ++l) fit += design.Pi(i, l) * xi[l];
    psi[i] = expectile_grad(data.y[i] - fit, alpha);
  }
  KktReport rep;
  rep.s = -(data.X.transpose() * psi) / static_cast<double>(n);
  rep.xi_grad = -(design.Pi.transpose() * psi) / static_cast<double>(n);
  rep.beta_residual.resize(p);
  rep.status.resize(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    const double res = kkt_coord(beta[j], rep.s[j], weights[j]);
    rep.beta_residual[j] = res;
    KktStatus st = beta[j] != 0.0 ? KktStatus::active_stationary : KktStatus::stationary;
    if (res > tol) st = KktStatus::violating;
    rep.status[static_cast<std::size_t>(j)] = st;
  }
  rep.max_beta = p > 0 ? rep.beta_residual.maxCoeff() : 0.0;
  rep.max_xi = D > 0 ? rep.xi_grad.lpNorm<Eigen::Infinity>() : 0.0;
  rep.max_residual = std::max(rep.max_beta, rep.max_xi);
  return rep;
}

KktReport kkt_report(const FitResult& fit, const Dataset& data, const DesignMatrix& design, double tol) {
  return kkt_report(data, design, fit.beta, fit.xi, fit.config.alpha, lla_weights(fit.beta, fit.config.penalty), tol);
}

}  // namespace plexp
