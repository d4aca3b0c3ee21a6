#include "plexp/sim.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <random>
#include <stdexcept>

#include "plexp/tuning.hpp"

namespace plexp::sim {

namespace {

constexpr double kRho = 0.5;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Penalty of the given family; the shape comes from base when the families agree.
PenaltySpec family_penalty(PenaltyFamily fam, double lambda, const PenaltySpec& base) {
  switch (fam) {
    case PenaltyFamily::scad: return PenaltySpec::scad(lambda, base.family == fam ? base.shape : 3.7);
    case PenaltyFamily::mcp: return PenaltySpec::mcp(lambda, base.family == fam ? base.shape : 1.0);
    default: return PenaltySpec::l1(lambda);
  }
}

}  // namespace

std::string_view to_string(ErrorDist e) {
  switch (e) {
    case ErrorDist::normal: return "normal";
    case ErrorDist::t5: return "t5";
    case ErrorDist::none: return "none";
  }
  return "normal";
}

ErrorDist parse_error_dist(std::string_view name) {
  if (name == "normal") return ErrorDist::normal;
  if (name == "t5") return ErrorDist::t5;
  if (name == "none") return ErrorDist::none;
  throw std::domain_error("unknown error distribution: " + std::string(name));
}

void ScenarioSpec::validate() const {
  if (n < 10) throw std::domain_error("scenario needs n >= 10");
  if (p < 26) throw std::domain_error("scenario needs p >= 26");
  if (replications < 1) throw std::domain_error("scenario needs at least one replication");
  if (tune_factor < 1) throw std::domain_error("tuning set factor must be >= 1");
  if (grid_size < 1 || !(grid_eps > 0.0 && grid_eps < 1.0)) throw std::domain_error("invalid lambda grid settings");
  if (!(max_active_fraction >= 0.0 && max_active_fraction <= 1.0)) {
    throw std::domain_error("max_active_fraction must lie in [0,1]");
  }
  if (alphas.empty()) throw std::domain_error("scenario needs at least one expectile level");
  for (double a : alphas) ExpectileLevel{a};
  for (auto f : penalties) {
    if (f == PenaltyFamily::none) throw std::domain_error("scenario penalties must be scad, mcp or l1");
  }
  spline.validate();
}

ScenarioSpec preset(std::string_view name) {
  ScenarioSpec s;
  if (name == "table1-normal") return s;
  if (name == "table1-t5") {
    s.error = ErrorDist::t5;
    return s;
  }
  if (name == "table2-normal") {
    s.p = 600;
    return s;
  }
  if (name == "table2-t5") {
    s.p = 600;
    s.error = ErrorDist::t5;
    return s;
  }
  throw std::domain_error("unknown preset: " + std::string(name));
}

std::vector<std::string> preset_names() { return {"table1-normal", "table1-t5", "table2-normal", "table2-t5"}; }

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL));
}

Eigen::MatrixXd ar1_correlation(int dim, double rho) {
  Eigen::MatrixXd S(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) S(i, j) = std::pow(rho, std::abs(i - j));
  }
  return S;
}

// Lower Cholesky factor of the AR(1) matrix applied to a normal vector, in O(dim):
// L(i,0) = rho^i, L(i,j) = rho^(i-j) sqrt(1 - rho^2) for 0 < j <= i.
Eigen::VectorXd ar1_apply_factor(const Eigen::VectorXd& normals, double rho) {
  Eigen::VectorXd out(normals.size());
  if (normals.size() == 0) return out;
  const double c = std::sqrt(1.0 - rho * rho);
  out[0] = normals[0];
  for (Eigen::Index k = 1; k < normals.size(); ++k) out[k] = rho * out[k - 1] + c * normals[k];
  return out;
}

Covariates gen_covariates(int n, int p, std::uint64_t seed) {
  if (p < 26) throw std::domain_error("gen_covariates needs p >= 26");
  if (n < 1) throw std::domain_error("gen_covariates needs n >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Covariates c;
  c.X.resize(n, p);
  c.Z.resize(n, 2);
  Eigen::VectorXd u(p + 2);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < p + 2; ++k) u[k] = normal(rng);
    const Eigen::VectorXd xt = ar1_apply_factor(u, kRho);
    // 1-based: x1 = sqrt(12) Phi(x~1); x_i = x~_i (2..24); z = Phi(x~25, x~26); x_i = x~_{i+2} (25..p).
    c.X(i, 0) = std::sqrt(12.0) * normal_cdf(xt[0]);
    for (int j = 2; j <= 24; ++j) c.X(i, j - 1) = xt[j - 1];
    c.Z(i, 0) = normal_cdf(xt[24]);
    c.Z(i, 1) = normal_cdf(xt[25]);
    for (int j = 25; j <= p; ++j) c.X(i, j - 1) = xt[j + 1];
  }
  return c;
}

Simulated gen_response(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z, const ScenarioSpec& scenario,
                       std::uint64_t seed) {
  if (X.rows() != Z.rows() || Z.cols() != 2 || X.cols() < 20) throw std::domain_error("gen_response: bad shapes");
  const auto n = X.rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::student_t_distribution<double> student(5.0);

  Simulated s;
  s.truth.beta = Eigen::VectorXd::Zero(X.cols());
  for (int j : kActive) s.truth.beta[j - 1] = 1.0;
  s.truth.g0.resize(n);
  s.data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double g0 = std::sin(2.0 * std::numbers::pi * Z(i, 0)) + std::pow(Z(i, 1), 3);
    double noise = 0.0;
    switch (scenario.error) {
      case ErrorDist::normal: noise = normal(rng); break;
      case ErrorDist::t5: noise = student(rng); break;
      case ErrorDist::none: noise = 0.0; break;
    }
    if (scenario.heteroscedastic) noise *= scenario.hetero_scale * X(i, 0);
    double lin = 0.0;
    for (int j : kActive) lin += X(i, j - 1);
    s.truth.g0[i] = g0;
    s.data.y[i] = lin + g0 + noise;
  }
  s.data.X = X;
  s.data.Z = Z;
  return s;
}

ReplicationMetrics compute_metrics(const FitResult& fit, const Truth& truth) {
  if (fit.beta.size() != truth.beta.size() || fit.centered.g_hat.size() != truth.g0.size()) {
    throw std::domain_error("compute_metrics: fit and truth dimensions differ");
  }
  ReplicationMetrics m;
  const Eigen::VectorXd diff = fit.beta - truth.beta;
  m.ae = diff.cwiseAbs().sum();
  m.se = diff.norm();
  // Intercepts are not separately identified, so compare both curves after removing their sample means.
  const Eigen::VectorXd gh = fit.centered.g_hat.array() - fit.centered.g_hat.mean();
  const Eigen::VectorXd g0 = truth.g0.array() - truth.g0.mean();
  m.ade = (gh - g0).cwiseAbs().mean();
  m.size = 0;
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j) m.size += fit.beta[j] != 0.0 ? 1 : 0;
  m.all_actives = true;
  for (int j : kActive) m.all_actives = m.all_actives && fit.beta[j - 1] != 0.0;
  m.x1 = fit.beta.size() > 0 && fit.beta[0] != 0.0;
  m.lambda = fit.config.penalty.lambda;
  return m;
}

Aggregate aggregate(const std::vector<ReplicationMetrics>& reps) {
  Aggregate a;
  a.count = static_cast<int>(reps.size());
  std::vector<double> ae, se, ade, size;
  int f = 0, f1 = 0;
  for (const auto& r : reps) {
    ae.push_back(r.ae);
    se.push_back(r.se);
    ade.push_back(r.ade);
    size.push_back(r.size);
    f += r.all_actives ? 1 : 0;
    f1 += r.x1 ? 1 : 0;
  }
  a.ae_mean = mean(ae), a.ae_sd = sd(ae);
  a.se_mean = mean(se), a.se_sd = sd(se);
  a.ade_mean = mean(ade), a.ade_sd = sd(ade);
  a.size_mean = mean(size), a.size_sd = sd(size);
  if (a.count > 0) {
    a.f_pct = 100.0 * f / a.count;
    a.f1_pct = 100.0 * f1 / a.count;
  }
  return a;
}

std::string method_name(PenaltyFamily f) {
  switch (f) {
    case PenaltyFamily::scad: return "E-SCAD";
    case PenaltyFamily::mcp: return "E-MCP";
    case PenaltyFamily::l1: return "E-Lasso";
    case PenaltyFamily::none: return "Unpenalized";
  }
  return "Unpenalized";
}

Replication make_replication(const ScenarioSpec& scenario, int rep) {
  const std::uint64_t seed = scenario.seed + static_cast<std::uint64_t>(rep);
  const Covariates train = gen_covariates(scenario.n, scenario.p, derive_seed(seed, 0));
  const Covariates tune = gen_covariates(scenario.tune_factor * scenario.n, scenario.p, derive_seed(seed, 1));
  return {gen_response(train.X, train.Z, scenario, derive_seed(seed, 2)),
          gen_response(tune.X, tune.Z, scenario, derive_seed(seed, 3))};
}

std::vector<int> oracle_active(const ScenarioSpec& scenario, double alpha) {
  std::vector<int> idx;
  if (scenario.heteroscedastic && scenario.error != ErrorDist::none && alpha != 0.5) idx.push_back(0);
  for (int j : kActive) idx.push_back(j - 1);
  return idx;
}

ExperimentReport run_experiment(const ScenarioSpec& scenario, const SolverConfig& base) {
  scenario.validate();
  base.validate();
  const int R = scenario.replications;
  const int A = static_cast<int>(scenario.alphas.size());
  const int M = static_cast<int>(scenario.penalties.size()) + (scenario.oracle ? 1 : 0);

  // slots[a][m][r]; filled independently, reduced in index order.
  std::vector<std::vector<std::vector<ReplicationMetrics>>> slots(
      static_cast<std::size_t>(A),
      std::vector<std::vector<ReplicationMetrics>>(static_cast<std::size_t>(M),
                                                   std::vector<ReplicationMetrics>(static_cast<std::size_t>(R))));
  std::vector<char> ok(static_cast<std::size_t>(A * M * R), 0);
  auto slot_ok = [&](int a, int m, int r) -> char& { return ok[static_cast<std::size_t>((a * M + m) * R + r)]; };

#pragma omp parallel for schedule(dynamic)
  for (int item = 0; item < A * R; ++item) {
    const int a = item / R, r = item % R;
    try {
      const Replication rep = make_replication(scenario, r);
      const DesignMatrix design = build_design(rep.train.data.Z, scenario.spline);
      SolverConfig cfg = base;
      if (cfg.path_max_active == 0) cfg.path_max_active = static_cast<int>(scenario.max_active_fraction * scenario.n);
      cfg.alpha = ExpectileLevel{scenario.alphas[static_cast<std::size_t>(a)]};
      const double lmax = lambda_max(rep.train.data, design, cfg);
      const LambdaGrid grid = LambdaGrid::geometric(lmax, scenario.grid_size, scenario.grid_eps);
      for (int m = 0; m < static_cast<int>(scenario.penalties.size()); ++m) {
        try {
          cfg.penalty = family_penalty(scenario.penalties[static_cast<std::size_t>(m)], lmax, base.penalty);
          const ValidationResult v = tune_by_validation(rep.train.data, design, rep.tune.data, grid, cfg);
          slots[a][m][r] = compute_metrics(v.best_fit, rep.train.truth);
          slot_ok(a, m, r) = 1;
        } catch (const std::exception&) {
        }
      }
      if (scenario.oracle) {
        try {
          cfg.penalty = PenaltySpec::unpenalized();
          const FitResult fit = oracle_fit(rep.train.data, design, oracle_active(scenario, cfg.alpha.value()), cfg);
          slots[a][M - 1][r] = compute_metrics(fit, rep.train.truth);
          slot_ok(a, M - 1, r) = 1;
        } catch (const std::exception&) {
        }
      }
    } catch (const std::exception&) {
    }
  }

  ExperimentReport report;
  report.scenario = scenario;
  for (int a = 0; a < A; ++a) {
    AlphaResult ar;
    ar.alpha = scenario.alphas[static_cast<std::size_t>(a)];
    for (int m = 0; m < M; ++m) {
      MethodResult mr;
      const bool is_oracle = scenario.oracle && m == M - 1;
      mr.method = is_oracle ? "Oracle" : method_name(scenario.penalties[static_cast<std::size_t>(m)]);
      mr.selects = !is_oracle;
      for (int r = 0; r < R; ++r) {
        if (slot_ok(a, m, r)) {
          mr.reps.push_back(slots[a][m][r]);
        } else {
          mr.failed_reps.push_back(r);
          ++report.failures;
        }
      }
      mr.summary = aggregate(mr.reps);
      ar.methods.push_back(std::move(mr));
    }
    report.results.push_back(std::move(ar));
  }
  return report;
}

}  // namespace plexp::sim
