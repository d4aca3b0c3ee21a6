#include "plexp/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "plexp/csv.hpp"
#include "plexp/model.hpp"
#include "plexp/report.hpp"
#include "plexp/sim.hpp"
#include "plexp/solver.hpp"
#include "plexp/tuning.hpp"

namespace plexp::cli {

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct ModelOptions {
  std::string data_path, y_col, x_cols, z_cols;
  double alpha = 0.5;
  std::string penalty = "scad";
  std::optional<double> lambda;
  double scad_a = 3.7;
  double mcp_b = 1.0;
  int spline_order = 4;
  int knots = 0;
  std::string knot_rule = "uniform";
  std::string tune;
  std::string tune_data;
  int grid_size = 50;
  double grid_eps = 0.01;
  unsigned long long seed = kDefaultSeed;
  int max_outer = 50;
  int max_inner = 2000;
  double tol_outer = 1e-6;
  double tol_inner = 1e-8;
  std::string init = "elasso";
  int max_active = 0;
  std::string out;
};

void add_model_options(CLI::App* app, ModelOptions& o) {
  app->add_option("--data", o.data_path, "Training CSV (header required)")->required();
  app->add_option("--y", o.y_col, "Response column")->required();
  app->add_option("--x", o.x_cols, "Comma-separated linear covariates (default: all other columns)");
  app->add_option("--z", o.z_cols, "Comma-separated nonparametric covariates")->required();
  app->add_option("--alpha", o.alpha, "Expectile level in (0,1)")->capture_default_str();
  app->add_option("--penalty", o.penalty, "scad, mcp, l1 or none")
      ->check(CLI::IsMember({"scad", "mcp", "l1", "none"}))
      ->capture_default_str();
  app->add_option("--lambda", o.lambda, "Penalty level");
  app->add_option("--scad-a", o.scad_a, "SCAD shape a > 2")->capture_default_str();
  app->add_option("--mcp-b", o.mcp_b, "MCP shape b > 0")->capture_default_str();
  app->add_option("--spline-order", o.spline_order, "B-spline order (degree + 1)")->capture_default_str();
  app->add_option("--knots", o.knots, "Internal knots per covariate")->capture_default_str();
  app->add_option("--knot-rule", o.knot_rule, "uniform or quantile")
      ->check(CLI::IsMember({"uniform", "quantile"}))
      ->capture_default_str();
  app->add_option("--tune", o.tune, "Lambda selection: holdout or cv:K");
  app->add_option("--tune-data", o.tune_data, "Tuning CSV for --tune holdout");
  app->add_option("--grid-size", o.grid_size, "Number of lambda values")->capture_default_str();
  app->add_option("--grid-eps", o.grid_eps, "Smallest lambda as a fraction of lambda_max")->capture_default_str();
  app->add_option("--seed", o.seed, "Seed for fold assignment")->capture_default_str();
  app->add_option("--max-outer", o.max_outer)->capture_default_str();
  app->add_option("--max-inner", o.max_inner)->capture_default_str();
  app->add_option("--tol-outer", o.tol_outer)->capture_default_str();
  app->add_option("--tol-inner", o.tol_inner)->capture_default_str();
  app->add_option("--init", o.init, "zero or elasso")->check(CLI::IsMember({"zero", "elasso"}))->capture_default_str();
  app->add_option("--max-active", o.max_active, "Stop the lambda path after a fit with more nonzeros (0: never)")
      ->capture_default_str();
  app->add_option("--out", o.out, "Output JSON path (default: stdout)");
}

Dataset load_dataset(const CsvTable& table, const std::string& y, const std::vector<std::string>& x,
                     const std::vector<std::string>& z) {
  Dataset d;
  d.y = table.numeric(y);
  d.X = table.numeric(x);
  d.Z = table.numeric(z);
  d.x_names = x;
  d.z_names = z;
  if (d.n() == 0) throw InputError("data file has no rows");
  return d;
}

std::vector<std::string> linear_columns(const CsvTable& t, const ModelOptions& o, const std::vector<std::string>& z) {
  if (!o.x_cols.empty()) return split_list(o.x_cols);
  std::vector<std::string> x;
  for (const auto& h : t.header) {
    if (h != o.y_col && std::find(z.begin(), z.end(), h) == z.end()) x.push_back(h);
  }
  return x;
}

SolverConfig solver_config(const ModelOptions& o) {
  SolverConfig c;
  c.alpha = ExpectileLevel{o.alpha};
  const PenaltyFamily fam = parse_penalty_family(o.penalty);
  const double lam = o.lambda.value_or(0.0);
  switch (fam) {
    case PenaltyFamily::scad: c.penalty = PenaltySpec::scad(lam, o.scad_a); break;
    case PenaltyFamily::mcp: c.penalty = PenaltySpec::mcp(lam, o.mcp_b); break;
    case PenaltyFamily::l1: c.penalty = PenaltySpec::l1(lam); break;
    case PenaltyFamily::none: c.penalty = PenaltySpec::unpenalized(); break;
  }
  c.max_outer = o.max_outer;
  c.max_inner = o.max_inner;
  c.tol_outer = o.tol_outer;
  c.tol_inner = o.tol_inner;
  c.init = o.init == "zero" ? InitRule::zero : InitRule::elasso;
  c.path_max_active = o.max_active;
  c.validate();
  return c;
}

SplineSpec spline_spec(int order, int knots, const std::string& rule) {
  SplineSpec s;
  s.order = order;
  s.internal_knots = knots;
  s.knot_rule = rule == "quantile" ? KnotRule::quantile : KnotRule::uniform;
  s.validate();
  return s;
}

// Parses "holdout" or "cv:K"; returns K (0 for holdout).
int parse_tune(const std::string& t) {
  if (t == "holdout") return 0;
  if (t.rfind("cv:", 0) == 0) {
    try {
      const int k = std::stoi(t.substr(3));
      if (k >= 2) return k;
    } catch (const std::exception&) {
    }
  }
  throw InputError("--tune must be holdout or cv:K with K >= 2");
}

void write_json(const Json& j, const std::string& path, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  f << text;
}

struct TuneOutcome {
  Json json;
  double lambda = 0.0;
  std::optional<FitResult> fit;  // holdout keeps the fit on the training data
};

TuneOutcome run_tuning(const ModelOptions& o, const Dataset& data, const DesignMatrix& design,
                       const SolverConfig& config, const SplineSpec& spline) {
  if (config.penalty.family == PenaltyFamily::none) throw InputError("tuning needs a penalty other than none");
  const int k = parse_tune(o.tune);
  const LambdaGrid grid = LambdaGrid::geometric(lambda_max(data, design, config), o.grid_size, o.grid_eps);
  TuneOutcome t;
  if (k == 0) {
    if (o.tune_data.empty()) throw InputError("--tune holdout needs --tune-data");
    const CsvTable tt = read_csv_file(o.tune_data);
    const Dataset tune_set = load_dataset(tt, o.y_col, data.x_names, data.z_names);
    ValidationResult v = tune_by_validation(data, design, tune_set, grid, config);
    t.json = validation_json(grid, v);
    t.lambda = v.best_lambda;
    t.fit = std::move(v.best_fit);
  } else {
    if (k > data.n()) throw InputError("cv folds exceed the number of rows");
    const CvResult cv = tune_by_cv(data, spline, k, grid, config, o.seed);
    t.json = cv_json(grid, cv, k, o.seed);
    t.lambda = cv.best_lambda;
  }
  return t;
}

int cmd_fit(const ModelOptions& o, std::ostream& out, std::ostream&, bool tune_only) {
  const CsvTable table = read_csv_file(o.data_path);
  const auto z = split_list(o.z_cols);
  if (z.empty()) throw InputError("--z needs at least one column");
  const auto x = linear_columns(table, o, z);
  const Dataset data = load_dataset(table, o.y_col, x, z);
  const SplineSpec spline = spline_spec(o.spline_order, o.knots, o.knot_rule);
  const DesignMatrix design = build_design(data.Z, spline);
  SolverConfig config = solver_config(o);

  std::optional<TuneOutcome> tuned;
  if (tune_only || !o.tune.empty()) {
    ModelOptions opts = o;
    if (opts.tune.empty()) opts.tune = "cv:5";
    tuned = run_tuning(opts, data, design, config, spline);
    if (tune_only) {
      Json j{{"schema_version", kSchemaVersion}, {"kind", "tune"}, {"alpha", config.alpha.value()},
             {"penalty", std::string(to_string(config.penalty.family))}, {"tuning", tuned->json}};
      write_json(j, o.out, out);
      return kExitOk;
    }
    config.penalty = config.penalty.with_lambda(tuned->lambda);
  } else if (config.penalty.family != PenaltyFamily::none && !o.lambda) {
    throw InputError("--lambda is required unless --penalty none or --tune is given");
  }

  FitResult fit = tuned && tuned->fit ? std::move(*tuned->fit) : two_step_fit(data, design, config);
  const FittedModel model = FittedModel::from_fit(fit, design, x, z);
  Json j = fit_to_json(fit, model);
  if (tuned) j["tuning"] = tuned->json;
  write_json(j, o.out, out);
  return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& data_path, const std::string& out_path,
                std::ostream& out, std::ostream& err) {
  std::ifstream mf(model_path);
  if (!mf) throw InputError("cannot open " + model_path);
  Json mj;
  try {
    mj = Json::parse(mf);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("model file is not valid JSON: ") + e.what());
  }
  const FittedModel model = model_from_json(mj);
  const CsvTable table = read_csv_file(data_path);
  const Eigen::MatrixXd X = table.numeric(model.x_names);
  const Eigen::MatrixXd Z = table.numeric(model.z_names);
  int clamped = 0;
  const Eigen::VectorXd pred = model.predict(X, Z, &clamped);
  if (clamped > 0) {
    err << "warning: " << clamped << " nonparametric covariate value(s) outside the training range were clamped\n";
  }
  std::ostringstream text;
  text << "prediction\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < pred.size(); ++i) text << pred[i] << '\n';
  if (out_path.empty()) {
    out << text.str();
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw InputError("cannot write " + out_path);
    f << text.str();
  }
  return kExitOk;
}

struct SimOptions {
  std::string preset;
  std::optional<int> n, p, reps, tune_factor, grid_size, spline_order, knots;
  std::optional<std::string> error, alphas, penalties;
  std::optional<double> hetero_scale, grid_eps, max_active_fraction;
  bool homoscedastic = false;
  bool no_oracle = false;
  unsigned long long seed = kDefaultSeed;
  std::string out, table;
};

int cmd_simulate(const SimOptions& o, std::ostream& out) {
  sim::ScenarioSpec s = o.preset.empty() ? sim::ScenarioSpec{} : sim::preset(o.preset);
  if (o.n) s.n = *o.n;
  if (o.p) s.p = *o.p;
  if (o.reps) s.replications = *o.reps;
  if (o.tune_factor) s.tune_factor = *o.tune_factor;
  if (o.grid_size) s.grid_size = *o.grid_size;
  if (o.grid_eps) s.grid_eps = *o.grid_eps;
  if (o.max_active_fraction) s.max_active_fraction = *o.max_active_fraction;
  if (o.spline_order) s.spline.order = *o.spline_order;
  if (o.knots) s.spline.internal_knots = *o.knots;
  if (o.error) s.error = sim::parse_error_dist(*o.error);
  if (o.hetero_scale) s.hetero_scale = *o.hetero_scale;
  if (o.homoscedastic) s.heteroscedastic = false;
  if (o.no_oracle) s.oracle = false;
  if (o.alphas) {
    s.alphas.clear();
    for (const auto& a : split_list(*o.alphas)) {
      try {
        s.alphas.push_back(std::stod(a));
      } catch (const std::exception&) {
        throw InputError("--alphas: not a number: " + a);
      }
    }
  }
  if (o.penalties) {
    s.penalties.clear();
    for (const auto& f : split_list(*o.penalties)) s.penalties.push_back(parse_penalty_family(f));
  }
  s.seed = o.seed;
  s.validate();

  SolverConfig config;
  const sim::ExperimentReport report = sim::run_experiment(s, config);
  const std::string table = experiment_table(report);
  if (!o.table.empty()) {
    std::ofstream f(o.table, std::ios::binary);
    if (!f) throw InputError("cannot write " + o.table);
    f << table;
  }
  const Json j = experiment_json(report, config);
  if (o.out.empty()) {
    out << j.dump(2) << '\n';
  } else {
    write_json(j, o.out, out);
    if (o.table.empty()) out << table;
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Penalized partially linear additive expectile regression"};
  app.require_subcommand(1);

  ModelOptions fit_opts, tune_opts;
  auto* fit = app.add_subcommand("fit", "Fit a model on CSV data and write it as JSON");
  add_model_options(fit, fit_opts);
  auto* tune = app.add_subcommand("tune", "Select lambda by holdout or k-fold cross-validation");
  add_model_options(tune, tune_opts);

  std::string model_path, pred_data, pred_out;
  auto* predict = app.add_subcommand("predict", "Evaluate a fitted model on new rows");
  predict->add_option("--model", model_path, "Model JSON written by fit")->required();
  predict->add_option("--data", pred_data, "CSV with the training covariate columns")->required();
  predict->add_option("--out", pred_out, "Output CSV path (default: stdout)");

  SimOptions so;
  auto* simulate = app.add_subcommand("simulate", "Run the Monte Carlo study");
  simulate->add_option("--preset", so.preset, "table1-normal, table1-t5, table2-normal or table2-t5");
  simulate->add_option("--n", so.n);
  simulate->add_option("--p", so.p);
  simulate->add_option("--error", so.error, "normal or t5");
  simulate->add_flag("--homoscedastic", so.homoscedastic);
  simulate->add_option("--hetero-scale", so.hetero_scale);
  simulate->add_option("--alphas", so.alphas, "Comma-separated expectile levels");
  simulate->add_option("--penalties", so.penalties, "Comma-separated penalties (scad, mcp, l1)");
  simulate->add_flag("--no-oracle", so.no_oracle);
  simulate->add_option("--reps", so.reps);
  simulate->add_option("--tune-factor", so.tune_factor);
  simulate->add_option("--grid-size", so.grid_size);
  simulate->add_option("--grid-eps", so.grid_eps);
  simulate->add_option("--max-active-fraction", so.max_active_fraction,
                       "Stop each lambda path once a fit has more than this fraction of n nonzeros (0: never)");
  simulate->add_option("--spline-order", so.spline_order);
  simulate->add_option("--knots", so.knots);
  simulate->add_option("--seed", so.seed)->capture_default_str();
  simulate->add_option("--out", so.out, "Report JSON path (default: stdout)");
  simulate->add_option("--table", so.table, "Text table path");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (*fit) return cmd_fit(fit_opts, out, err, false);
    if (*tune) {
      if (tune_opts.tune.empty()) tune_opts.tune = "cv:5";
      return cmd_fit(tune_opts, out, err, true);
    }
    if (*predict) return cmd_predict(model_path, pred_data, pred_out, out, err);
    if (*simulate) return cmd_simulate(so, out);
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << " [stage " << e.stage << ", iterations " << e.iterations
        << ", residual " << e.residual << "]\n";
    return kExitSolver;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitInput;
}

}  // namespace plexp::cli
