#include "plexp/penalty.hpp"

#include <cmath>
#include <stdexcept>

namespace plexp {

namespace {

double sgn(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

// P'(t) for t >= 0, with P'(0) = lambda.
double slope_abs(double t, const PenaltySpec& s) {
  const double lam = s.lambda;
  switch (s.family) {
    case PenaltyFamily::scad:
      if (t <= lam) return lam;
      return std::max(s.shape * lam - t, 0.0) / (s.shape - 1.0);
    case PenaltyFamily::mcp:
      return std::max(lam - t / s.shape, 0.0);
    case PenaltyFamily::l1:
      return lam;
    case PenaltyFamily::none:
      return 0.0;
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(PenaltyFamily f) {
  switch (f) {
    case PenaltyFamily::scad: return "scad";
    case PenaltyFamily::mcp: return "mcp";
    case PenaltyFamily::l1: return "l1";
    case PenaltyFamily::none: return "none";
  }
  return "none";
}

PenaltyFamily parse_penalty_family(std::string_view name) {
  if (name == "scad") return PenaltyFamily::scad;
  if (name == "mcp") return PenaltyFamily::mcp;
  if (name == "l1" || name == "lasso") return PenaltyFamily::l1;
  if (name == "none") return PenaltyFamily::none;
  throw std::domain_error("unknown penalty family: " + std::string(name));
}

void PenaltySpec::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::domain_error("penalty lambda must be finite and >= 0");
  if (family == PenaltyFamily::scad && !(shape > 2.0)) throw std::domain_error("SCAD requires a > 2");
  if (family == PenaltyFamily::mcp && !(shape > 0.0)) throw std::domain_error("MCP requires b > 0");
}

double penalty_value(double theta, const PenaltySpec& spec) {
  spec.validate();
  const double t = std::abs(theta);
  const double lam = spec.lambda;
  switch (spec.family) {
    case PenaltyFamily::scad: {
      const double a = spec.shape;
      if (t <= lam) return lam * t;
      if (t <= a * lam) return (a * lam * t - 0.5 * (t * t + lam * lam)) / (a - 1.0);
      return 0.5 * (a + 1.0) * lam * lam;
    }
    case PenaltyFamily::mcp: {
      const double b = spec.shape;
      if (t <= lam * b) return lam * t - t * t / (2.0 * b);
      return 0.5 * lam * lam * b;
    }
    case PenaltyFamily::l1:
      return lam * t;
    case PenaltyFamily::none:
      return 0.0;
  }
  return 0.0;
}

PenaltySlope penalty_deriv(double theta, const PenaltySpec& spec) {
  spec.validate();
  if (theta == 0.0) return {slope_abs(0.0, spec), spec.family != PenaltyFamily::none};
  return {sgn(theta) * slope_abs(std::abs(theta), spec), false};
}

double dc_h_value(double theta, double lambda, double a) {
  const double t = std::abs(theta);
  if (t <= lambda) return 0.0;
  if (t <= a * lambda) return (t * t - 2.0 * lambda * t + lambda * lambda) / (2.0 * (a - 1.0));
  // outer constant (a+1) lambda^2 / 2
  return lambda * t - 0.5 * (a + 1.0) * lambda * lambda;
}

double dc_h_deriv(double theta, double lambda, double a) {
  const double t = std::abs(theta);
  if (t <= lambda) return 0.0;
  if (t <= a * lambda) return (theta - lambda * sgn(theta)) / (a - 1.0);
  return lambda * sgn(theta);
}

double dc_h_value(double theta, const PenaltySpec& spec) {
  spec.validate();
  switch (spec.family) {
    case PenaltyFamily::scad:
      return dc_h_value(theta, spec.lambda, spec.shape);
    case PenaltyFamily::mcp: {
      const double t = std::abs(theta), b = spec.shape, lam = spec.lambda;
      if (t <= lam * b) return theta * theta / (2.0 * b);
      return lam * t - 0.5 * lam * lam * b;
    }
    default:
      return 0.0;
  }
}

double dc_h_deriv(double theta, const PenaltySpec& spec) {
  spec.validate();
  switch (spec.family) {
    case PenaltyFamily::scad:
      return dc_h_deriv(theta, spec.lambda, spec.shape);
    case PenaltyFamily::mcp: {
      const double b = spec.shape, lam = spec.lambda;
      if (std::abs(theta) <= lam * b) return theta / b;
      return lam * sgn(theta);
    }
    default:
      return 0.0;
  }
}

Eigen::VectorXd lla_weights(const Eigen::VectorXd& beta, const PenaltySpec& spec) {
  spec.validate();
  Eigen::VectorXd w(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) w[j] = slope_abs(std::abs(beta[j]), spec);
  return w;
}

double total_penalty(const Eigen::VectorXd& beta, const PenaltySpec& spec) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) s += penalty_value(beta[j], spec);
  }
  return s;
}

}  // namespace plexp
