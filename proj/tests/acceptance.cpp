// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "plexp/cli.hpp"
#include "plexp/loss.hpp"
#include "plexp/penalty.hpp"
#include "plexp/report.hpp"
#include "plexp/sim.hpp"
#include "plexp/solver.hpp"
#include "plexp/spline.hpp"

using namespace plexp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Dataset random_instance(int n, int p, int d, std::mt19937_64& rng, const Eigen::VectorXd& beta, double noise) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  Dataset data;
  data.X.resize(n, p);
  data.Z.resize(n, d);
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) data.X(i, j) = nd(rng);
    for (int j = 0; j < d; ++j) data.Z(i, j) = ud(rng);
  }
  for (int i = 0; i < n; ++i) {
    double g = std::sin(2 * M_PI * data.Z(i, 0));
    if (d > 1) g += std::pow(data.Z(i, 1), 3);
    data.y[i] = data.X.row(i).dot(beta) + g + noise * nd(rng);
  }
  return data;
}

Outcome loss_properties() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ur(-5.0, 5.0), ua(0.001, 0.999);
  long violations = 0;
  for (int k = 0; k < 100000; ++k) {
    const ExpectileLevel a{ua(rng)};
    const double r = ur(rng), r0 = ur(rng), d = r - r0;
    const double gap = expectile_loss(r, a) - expectile_loss(r0, a) - expectile_grad(r0, a) * d;
    const double lip = std::abs(expectile_grad(r, a) - expectile_grad(r0, a));
    if (gap < a.c1() * d * d - 1e-12 || gap > a.c2() * d * d + 1e-12) ++violations;
    if (lip < 2 * a.c1() * std::abs(d) - 1e-12 || lip > 2 * a.c2() * std::abs(d) + 1e-12) ++violations;
    if (expectile_curvature(r, a) > 2 * a.c2()) ++violations;
  }
  return {violations == 0, fmt("%.0f violations in 1e5 triples", static_cast<double>(violations))};
}

Outcome dc_identity() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ul(0.05, 2.0), ua(2.1, 6.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double lam = ul(rng), a = ua(rng);
    for (const auto& spec : {PenaltySpec::scad(lam, a), PenaltySpec::mcp(lam, a)}) {
      const double span = 6 * lam * a;
      for (int g = -600; g <= 600; ++g) {
        const double t = span * g / 600.0;
        worst = std::max(worst, std::abs(lam * std::abs(t) - dc_h_value(t, spec) - penalty_value(t, spec)));
      }
    }
  }
  return {worst <= 1e-12, fmt("max |lambda|t| - H - P| = %.2e over 20 (lambda, a) x {SCAD, MCP}", worst)};
}

Outcome spline_suite() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  double pu = 0.0;
  const std::vector<double> knots{0, 0, 0, 0, 0.3, 0.7, 1, 1, 1, 1};
  for (int k = 0; k < 10000; ++k) pu = std::max(pu, std::abs(basis_eval(ud(rng), knots, 4).sum() - 1.0));
  bool dims = true;
  double recon = 0.0;
  for (int d = 1; d <= 4; ++d) {
    Eigen::MatrixXd Z(80, d);
    for (int i = 0; i < 80; ++i)
      for (int j = 0; j < d; ++j) Z(i, j) = ud(rng);
    const DesignMatrix design = build_design(Z, SplineSpec{});
    dims = dims && design.cols() == 1 + 3 * d;
    Eigen::VectorXd xi(design.cols());
    for (Eigen::Index l = 0; l < xi.size(); ++l) xi[l] = ud(rng) - 0.5;
    const CenteredFit c = center_fit(xi, design);
    recon = std::max(recon, (c.mu + c.g.rowwise().sum().array() - (design.Pi * xi).array()).abs().maxCoeff());
  }
  return {pu <= 1e-12 && dims && recon <= 1e-10,
          fmt("partition of unity %.1e, reconstruction %.1e, D_n = 1 + 3d for d = 1..4: ", pu, recon) +
              (dims ? "yes" : "no")};
}

Outcome alpha_half_equivalence() {
  std::mt19937_64 rng(4);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd beta(5);
    beta << 1.0, -0.5, 0.0, 2.0, 0.25;
    const Dataset data = random_instance(100, 5, 2, rng, beta, 0.5);
    const DesignMatrix design = build_design(data.Z, SplineSpec{});
    SolverConfig cfg;
    cfg.init = InitRule::zero;
    const FitResult fit = two_step_fit(data, design, cfg);
    Eigen::MatrixXd M(100, 5 + design.cols());
    M << data.X, design.Pi;
    const Eigen::VectorXd ls = M.completeOrthogonalDecomposition().solve(data.y);
    const Eigen::VectorXd mine = (Eigen::VectorXd(ls.size()) << fit.beta, fit.xi).finished();
    worst = std::max(worst, (mine - ls).norm() / ls.norm());
  }
  return {worst <= 1e-6, fmt("max relative difference to joint least squares %.2e", worst)};
}

Outcome gradient_check() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ua(0.05, 0.95);
  double worst = 0.0;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(6);
  beta[1] = 1.0;
  const Dataset data = random_instance(60, 6, 2, rng, beta, 0.7);
  const DesignMatrix design = build_design(data.Z, SplineSpec{});
  for (int k = 0; k < 50; ++k) {
    const ExpectileLevel a{ua(rng)};
    Eigen::VectorXd b(6), xi(design.cols());
    for (auto& v : b) v = nd(rng);
    for (auto& v : xi) v = nd(rng);
    const KktReport rep = kkt_report(data, design, b, xi, a, Eigen::VectorXd::Zero(6), 0.0);
    auto loss = [&](const Eigen::VectorXd& bb, const Eigen::VectorXd& xx) {
      return empirical_loss(data.y, data.X, bb, design.Pi, xx, a);
    };
    Eigen::VectorXd analytic(6 + xi.size()), numeric(6 + xi.size());
    analytic << rep.s, rep.xi_grad;
    for (Eigen::Index j = 0; j < analytic.size(); ++j) {
      Eigen::VectorXd bp = b, bm = b, xp = xi, xm = xi;
      const double h = 1e-6;
      if (j < 6) {
        bp[j] += h;
        bm[j] -= h;
      } else {
        xp[j - 6] += h;
        xm[j - 6] -= h;
      }
      numeric[j] = (loss(bp, xp) - loss(bm, xm)) / (2 * h);
    }
    worst = std::max(worst, (analytic - numeric).norm() / std::max(1e-12, numeric.norm()));
  }
  return {worst <= 1e-5, fmt("max relative error %.2e over 50 points", worst)};
}

// Criteria 6 and 7 share the fits.
std::pair<Outcome, Outcome> descent_and_kkt() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ul(0.03, 0.3);
  double worst_rise = -1e300;
  double worst_kkt = 0.0;
  int solves = 0;
  const double alphas[3] = {0.1, 0.5, 0.9};
  const char* fams[3] = {"scad", "mcp", "l1"};
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(40);
    beta[2] = 1.5;
    beta[7] = -1.0;
    beta[20] = 0.8;
    const Dataset data = random_instance(120, 40, 2, rng, beta, 0.6);
    const DesignMatrix design = build_design(data.Z, SplineSpec{});
    SolverConfig cfg;
    cfg.alpha = ExpectileLevel{alphas[k % 3]};
    const double lam = ul(rng);
    const std::string fam = fams[(k / 3) % 3];
    cfg.penalty = fam == "scad" ? PenaltySpec::scad(lam) : fam == "mcp" ? PenaltySpec::mcp(lam, 3.0) : PenaltySpec::l1(lam);
    cfg.init = InitRule::zero;
    cfg.record_iterates = true;
    const FitResult fit = two_step_fit(data, design, cfg);
    for (std::size_t t = 1; t < fit.objective_trace.size(); ++t) {
      worst_rise = std::max(worst_rise, fit.objective_trace[t] - fit.objective_trace[t - 1]);
    }
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(40);
    for (const auto& it : fit.iterates) {
      // step (a): xi minimizes the loss given the previous beta; step (b): beta solves the weighted-L1 problem
      worst_kkt = std::max(worst_kkt, kkt_report(data, design, prev, it.xi, cfg.alpha, it.weights, 1e-6).max_xi);
      worst_kkt = std::max(worst_kkt, kkt_report(data, design, it.beta, it.xi, cfg.alpha, it.weights, 1e-6).max_beta);
      prev = it.beta;
      solves += 2;
    }
    worst_kkt = std::max(worst_kkt, kkt_report(fit, data, design, 1e-6).max_xi);
  }
  return {{worst_rise <= 1e-10, fmt("largest objective increase %.2e over 20 fits", worst_rise)},
          {worst_kkt <= 1e-6, fmt("max KKT residual %.2e over %.0f inner solves", worst_kkt, solves)}};
}

Outcome oracle_rate() {
  sim::ScenarioSpec s;
  s.p = 26;
  auto mean_error = [&](int n) {
    s.n = n;
    double acc = 0.0;
    for (int r = 0; r < 50; ++r) {
      const std::uint64_t seed = sim::derive_seed(777 + static_cast<std::uint64_t>(r), 0);
      const sim::Covariates c = sim::gen_covariates(n, s.p, seed);
      const sim::Simulated d = sim::gen_response(c.X, c.Z, s, seed + 1);
      const DesignMatrix design = build_design(d.data.Z, s.spline);
      const std::vector<int> A = sim::oracle_active(s, 0.5);
      const FitResult fit = oracle_fit(d.data, design, A, SolverConfig{});
      double sq = 0.0;
      for (int j : A) sq += std::pow(fit.beta[j] - d.truth.beta[j], 2);
      acc += std::sqrt(sq);
    }
    return acc / 50;
  };
  const double e150 = mean_error(150), e300 = mean_error(300), ratio = e150 / e300;
  return {ratio >= 1.2 && ratio <= 1.8, fmt("mean error %.4f (n=150) / %.4f (n=300) = %.3f", e150, e300, ratio)};
}

const sim::MethodResult& method(const sim::AlphaResult& a, const std::string& name) {
  for (const auto& m : a.methods)
    if (m.method == name) return m;
  throw std::runtime_error("missing method " + name);
}

Outcome selection_p400() {
  sim::ScenarioSpec s = sim::preset("table1-normal");
  s.alphas = {0.1, 0.5};
  s.replications = 50;
  const sim::ExperimentReport r = sim::run_experiment(s, SolverConfig{});
  std::cout << experiment_table(r) << "failures: " << r.failures << "\n";
  const auto& a01 = r.results[0];
  const auto& a05 = r.results[1];
  const auto& scad05 = method(a05, "E-SCAD").summary;
  const auto& scad01 = method(a01, "E-SCAD").summary;
  const bool ok = scad05.f_pct == 100.0 && scad05.f1_pct <= 20.0 && scad05.size_mean >= 4 && scad05.size_mean <= 8 &&
                  scad05.ae_mean >= 0.15 && scad05.ae_mean <= 0.6 && scad01.f1_pct >= 60.0 &&
                  method(a05, "E-Lasso").summary.size_mean > scad05.size_mean &&
                  method(a01, "E-Lasso").summary.size_mean > scad01.size_mean && r.failures == 0;
  return {ok, fmt("alpha=0.5 E-SCAD F=%.0f F1=%.0f Size=%.2f AE=%.3f", scad05.f_pct, scad05.f1_pct, scad05.size_mean,
                  scad05.ae_mean) +
                  fmt("; alpha=0.1 F1=%.0f; Lasso Size %.2f / %.2f", scad01.f1_pct,
                      method(a05, "E-Lasso").summary.size_mean, method(a01, "E-Lasso").summary.size_mean)};
}

Outcome heavy_tails_p600() {
  sim::ScenarioSpec s = sim::preset("table2-normal");
  s.alphas = {0.9};
  s.replications = 25;
  s.penalties = {PenaltyFamily::scad};
  const sim::ExperimentReport normal = sim::run_experiment(s, SolverConfig{});
  s.error = sim::ErrorDist::t5;
  const sim::ExperimentReport t5 = sim::run_experiment(s, SolverConfig{});
  std::cout << experiment_table(normal) << experiment_table(t5);
  const auto& n = method(normal.results[0], "E-SCAD").summary;
  const auto& t = method(t5.results[0], "E-SCAD").summary;
  const bool ok = t.ae_mean > n.ae_mean && n.f_pct >= 90.0 && t.f_pct >= 90.0;
  return {ok, fmt("E-SCAD AE normal %.3f, t5 %.3f; F normal %.0f, t5 %.0f", n.ae_mean, t.ae_mean, n.f_pct, t.f_pct)};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "plexp_acceptance";
  fs::create_directories(dir);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };
  std::ostringstream sink;
  std::ofstream csv(dir / "data.csv");
  {
    std::mt19937_64 rng(8);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(10);
    beta[0] = 1.0;
    beta[4] = -1.0;
    const Dataset d = random_instance(80, 10, 1, rng, beta, 0.5);
    csv << "y";
    for (int j = 0; j < 10; ++j) csv << ",x" << j + 1;
    csv << ",z1\n";
    csv.precision(17);
    for (int i = 0; i < 80; ++i) {
      csv << d.y[i];
      for (int j = 0; j < 10; ++j) csv << ',' << d.X(i, j);
      csv << ',' << d.Z(i, 0) << '\n';
    }
  }
  csv.close();
  bool same = true;
  int codes = 0;
  for (const auto* kind : {"simulate", "tune"}) {
    std::string prev;
    for (int k = 0; k < 2; ++k) {
      const fs::path out = dir / (std::string(kind) + std::to_string(k) + ".json");
      std::vector<std::string> args;
      if (std::string(kind) == "simulate") {
        args = {"simulate", "--n", "100", "--p", "50", "--reps", "3", "--alphas", "0.3,0.7", "--grid-size", "15",
                "--seed", "5", "--out", out.string(), "--table", (dir / "t.txt").string()};
      } else {
        args = {"tune", "--data", (dir / "data.csv").string(), "--y", "y", "--z", "z1", "--penalty", "scad",
                "--tune", "cv:5", "--seed", "5", "--grid-size", "20", "--out", out.string()};
      }
      codes += plexp::cli::run(args, sink, sink);
      const std::string text = slurp(out);
      if (k == 1) same = same && text == prev && !text.empty();
      prev = text;
    }
  }
  return {same && codes == 0, same ? "simulate and tune reruns are byte-identical" : "outputs differ"};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const std::string& name, double limit, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = limit <= 0 || secs < limit;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::cout << "criterion " << id << " [" << name << "]: " << (pass ? "PASS" : "FAIL") << " - " << o.detail
              << fmt(" (%.1f s", secs) << (limit > 0 ? fmt(", limit %.0f s)", limit) : std::string(")"))
              << (in_time ? "" : " over time") << std::endl;
  };

  report(1, "loss properties", 5, loss_properties);
  report(2, "DC identity", 1, dc_identity);
  report(3, "splines", 0, spline_suite);
  report(4, "alpha=0.5 least squares", 10, alpha_half_equivalence);
  report(5, "gradient check", 0, gradient_check);
  std::pair<Outcome, Outcome> dk;
  report(6, "descent", 0, [&] {
    dk = descent_and_kkt();
    return dk.first;
  });
  report(7, "KKT", 0, [&] { return dk.second; });
  report(8, "oracle rate", 120, oracle_rate);
  report(9, "p=400 selection", 1800, selection_p400);
  report(10, "p=600 heavy tails", 1800, heavy_tails_p600);
  report(11, "determinism", 0, determinism);
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
