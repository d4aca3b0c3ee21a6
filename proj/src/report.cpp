#include "plexp/report.hpp"

#include <cstdio>
#include <sstream>

#include "plexp/csv.hpp"

namespace plexp {

namespace {

Json penalty_json(const PenaltySpec& p) {
  return Json{{"family", std::string(to_string(p.family))}, {"lambda", p.lambda}, {"shape", p.shape}};
}

std::string init_name(InitRule r) {
  switch (r) {
    case InitRule::zero: return "zero";
    case InitRule::elasso: return "elasso";
    case InitRule::user: return "user";
  }
  return "zero";
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("model file: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string("model file: field '") + key + "' has the wrong type");
  }
}

std::string cell(double mean, double sd) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f(%.2f)", mean, sd);
  return buf;
}

}  // namespace

Json solver_config_json(const SolverConfig& c) {
  return Json{{"alpha", c.alpha.value()},     {"penalty", penalty_json(c.penalty)}, {"max_outer", c.max_outer},
              {"max_inner", c.max_inner},     {"tol_outer", c.tol_outer},           {"tol_inner", c.tol_inner},
              {"ridge_eps", c.ridge_eps},     {"init", init_name(c.init)},          {"lla_passes", c.lla_passes},
              {"path_max_active", c.path_max_active}};
}

Json fit_to_json(const FitResult& fit, const FittedModel& model) {
  Json beta = Json::object();
  std::vector<std::string> active;
  for (int j : fit.active_set) {
    const std::string name =
        j < static_cast<int>(model.x_names.size()) ? model.x_names[static_cast<std::size_t>(j)] : "x" + std::to_string(j + 1);
    beta[name] = fit.beta[j];
    active.push_back(name);
  }
  Json comps = Json::array();
  for (std::size_t j = 0; j < model.bases.size(); ++j) {
    const auto& b = model.bases[j];
    comps.push_back(Json{{"column", j < model.z_names.size() ? model.z_names[j] : "z" + std::to_string(j + 1)},
                         {"lo", b.lo},
                         {"hi", b.hi},
                         {"order", b.order},
                         {"drop_first", b.drop_first},
                         {"knots", b.knots},
                         {"coefficients", to_vector(model.block_coef[j])},
                         {"offset", model.offsets[static_cast<Eigen::Index>(j)]}});
  }
  return Json{{"schema_version", kSchemaVersion},
              {"kind", "fit"},
              {"alpha", model.alpha},
              {"penalty", penalty_json(fit.config.penalty)},
              {"x_columns", model.x_names},
              {"z_columns", model.z_names},
              {"beta", beta},
              {"mu", model.mu},
              {"components", comps},
              {"xi", to_vector(fit.xi)},
              {"fitted", to_vector(fit.fitted)},
              {"diagnostics",
               Json{{"outer_iters", fit.outer_iters},
                    {"converged", fit.converged},
                    {"ridge_fallback", fit.ridge_fallback},
                    {"kkt_max_residual", fit.kkt_max_residual},
                    {"objective_trace", fit.objective_trace},
                    {"active_set", active}}},
              {"solver", solver_config_json(fit.config)}};
}

FittedModel model_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("model file: not a JSON object");
  if (field<int>(j, "schema_version") != kSchemaVersion) throw InputError("model file: unsupported schema_version");
  if (field<std::string>(j, "kind") != "fit") throw InputError("model file: not a fit");
  FittedModel m;
  m.alpha = field<double>(j, "alpha");
  m.x_names = field<std::vector<std::string>>(j, "x_columns");
  m.z_names = field<std::vector<std::string>>(j, "z_columns");
  m.mu = field<double>(j, "mu");
  m.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.x_names.size()));
  const Json beta = field<Json>(j, "beta");
  for (auto it = beta.begin(); it != beta.end(); ++it) {
    std::size_t k = 0;
    while (k < m.x_names.size() && m.x_names[k] != it.key()) ++k;
    if (k == m.x_names.size()) throw InputError("model file: coefficient for unknown column " + it.key());
    if (!it.value().is_number()) throw InputError("model file: non-numeric coefficient");
    m.beta[static_cast<Eigen::Index>(k)] = it.value().get<double>();
  }
  const Json comps = field<Json>(j, "components");
  if (!comps.is_array() || comps.size() != m.z_names.size()) throw InputError("model file: components do not match z_columns");
  m.offsets.resize(static_cast<Eigen::Index>(comps.size()));
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const Json& cj = comps[c];
    CovariateBasis b;
    b.lo = field<double>(cj, "lo");
    b.hi = field<double>(cj, "hi");
    b.order = field<int>(cj, "order");
    b.drop_first = field<bool>(cj, "drop_first");
    b.knots = field<std::vector<double>>(cj, "knots");
    if (!(b.hi > b.lo) || b.order < 1 || b.basis_count() < 1) throw InputError("model file: invalid spline component");
    const auto coef = field<std::vector<double>>(cj, "coefficients");
    if (static_cast<int>(coef.size()) != b.basis_count()) throw InputError("model file: coefficient count mismatch");
    m.block_coef.push_back(to_eigen(coef));
    m.offsets[static_cast<Eigen::Index>(c)] = field<double>(cj, "offset");
    m.bases.push_back(std::move(b));
  }
  return m;
}

Json validation_json(const LambdaGrid& grid, const ValidationResult& v) {
  return Json{{"method", "holdout"},
              {"lambdas", grid.values},
              {"losses", v.losses},
              {"sizes", v.sizes},
              {"best_index", v.best_index},
              {"best_lambda", v.best_lambda}};
}

Json cv_json(const LambdaGrid& grid, const CvResult& cv, int k, std::uint64_t seed) {
  return Json{{"method", "cv"},
              {"folds", k},
              {"seed", seed},
              {"lambdas", grid.values},
              {"mean_losses", cv.mean_losses},
              {"fold_losses", cv.fold_losses},
              {"best_index", cv.best_index},
              {"best_lambda", cv.best_lambda}};
}

Json experiment_json(const sim::ExperimentReport& report, const SolverConfig& config) {
  const auto& s = report.scenario;
  std::vector<std::string> pens;
  for (auto f : s.penalties) pens.emplace_back(to_string(f));
  Json scenario{{"n", s.n},
                {"p", s.p},
                {"error", std::string(sim::to_string(s.error))},
                {"heteroscedastic", s.heteroscedastic},
                {"hetero_scale", s.hetero_scale},
                {"alphas", s.alphas},
                {"penalties", pens},
                {"oracle", s.oracle},
                {"replications", s.replications},
                {"seed", s.seed},
                {"tune_factor", s.tune_factor},
                {"grid_size", s.grid_size},
                {"grid_eps", s.grid_eps},
                {"max_active_fraction", s.max_active_fraction},
                {"spline", Json{{"order", s.spline.order},
                                {"internal_knots", s.spline.internal_knots},
                                {"knot_rule", s.spline.knot_rule == KnotRule::uniform ? "uniform" : "quantile"},
                                {"drop_first", s.spline.drop_first}}}};
  Json results = Json::array();
  for (const auto& ar : report.results) {
    Json methods = Json::array();
    for (const auto& m : ar.methods) {
      const auto& a = m.summary;
      Json reps = Json::array();
      for (const auto& r : m.reps) {
        reps.push_back(Json{{"ae", r.ae}, {"se", r.se}, {"ade", r.ade}, {"size", r.size},
                            {"all_actives", r.all_actives}, {"x1", r.x1}, {"lambda", r.lambda}});
      }
      Json mj{{"method", m.method},
              {"count", a.count},
              {"failed_replications", m.failed_reps},
              {"AE", Json{{"mean", a.ae_mean}, {"sd", a.ae_sd}}},
              {"SE", Json{{"mean", a.se_mean}, {"sd", a.se_sd}}},
              {"ADE", Json{{"mean", a.ade_mean}, {"sd", a.ade_sd}}}};
      if (m.selects) {
        mj["Size"] = Json{{"mean", a.size_mean}, {"sd", a.size_sd}};
        mj["F"] = a.f_pct;
        mj["F1"] = a.f1_pct;
      }
      mj["replications"] = reps;
      methods.push_back(mj);
    }
    results.push_back(Json{{"alpha", ar.alpha}, {"methods", methods}});
  }
  Json solver = solver_config_json(config);
  solver.erase("alpha");
  solver.erase("penalty");
  return Json{{"schema_version", kSchemaVersion},
              {"kind", "simulation"},
              {"scenario", scenario},
              {"solver", solver},
              {"failures", report.failures},
              {"results", results}};
}

std::string experiment_table(const sim::ExperimentReport& report) {
  const auto& s = report.scenario;
  std::ostringstream out;
  out << "Simulation results when n=" << s.n << ", p=" << s.p << " (" << sim::to_string(s.error) << " errors, "
      << (s.heteroscedastic ? "heteroscedastic" : "homoscedastic") << ", R=" << s.replications << ")\n";
  char buf[128];
  auto row = [&](const std::string& label, const std::string& crit, const std::vector<std::string>& cells) {
    std::snprintf(buf, sizeof buf, "%-10s %-6s", label.c_str(), crit.c_str());
    out << buf;
    for (const auto& c : cells) {
      std::snprintf(buf, sizeof buf, " %14s", c.c_str());
      out << buf;
    }
    out << '\n';
  };
  if (report.results.empty()) return out.str();
  std::vector<std::string> head;
  for (const auto& m : report.results.front().methods) head.push_back(m.method);
  row("", "", head);
  for (const auto& ar : report.results) {
    std::vector<std::string> ae, se, ade, size, f;
    for (const auto& m : ar.methods) {
      const auto& a = m.summary;
      ae.push_back(cell(a.ae_mean, a.ae_sd));
      se.push_back(cell(a.se_mean, a.se_sd));
      ade.push_back(cell(a.ade_mean, a.ade_sd));
      if (m.selects) {
        size.push_back(cell(a.size_mean, a.size_sd));
        std::snprintf(buf, sizeof buf, "%.0f, %.0f", a.f_pct, a.f1_pct);
        f.emplace_back(buf);
      } else {
        size.emplace_back("-");
        f.emplace_back("-");
      }
    }
    std::snprintf(buf, sizeof buf, "alpha=%.2f", ar.alpha);
    row(buf, "AE", ae);
    row("", "SE", se);
    row("", "ADE", ade);
    row("", "Size", size);
    row("", "F,F1", f);
  }
  if (report.failures > 0) out << "failed fits: " << report.failures << '\n';
  return out.str();
}

}  // namespace plexp
