#pragma once

#include <string>

#include "json.hpp"
#include "plexp/model.hpp"
#include "plexp/sim.hpp"
#include "plexp/solver.hpp"
#include "plexp/tuning.hpp"

namespace plexp {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json solver_config_json(const SolverConfig& config);

// Model file written by `fit` and read by `predict`.
Json fit_to_json(const FitResult& fit, const FittedModel& model);

// Throws InputError on a missing field or a schema mismatch.
FittedModel model_from_json(const Json& j);

Json validation_json(const LambdaGrid& grid, const ValidationResult& v);
Json cv_json(const LambdaGrid& grid, const CvResult& cv, int k, std::uint64_t seed);

Json experiment_json(const sim::ExperimentReport& report, const SolverConfig& config);

// Criterion rows by method columns, one block per expectile level: "0.31(0.14)".
std::string experiment_table(const sim::ExperimentReport& report);

}  // namespace plexp
