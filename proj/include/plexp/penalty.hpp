#pragma once

#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace plexp {

enum class PenaltyFamily { scad, mcp, l1, none };

std::string_view to_string(PenaltyFamily f);
PenaltyFamily parse_penalty_family(std::string_view name);

// Penalty family with its level lambda and shape (SCAD a, MCP b).
struct PenaltySpec {
  PenaltyFamily family = PenaltyFamily::none;
  double lambda = 0.0;
  double shape = 0.0;

  static PenaltySpec scad(double lambda, double a = 3.7) { return {PenaltyFamily::scad, lambda, a}; }
  static PenaltySpec mcp(double lambda, double b = 1.0) { return {PenaltyFamily::mcp, lambda, b}; }
  static PenaltySpec l1(double lambda) { return {PenaltyFamily::l1, lambda, 0.0}; }
  static PenaltySpec unpenalized() { return {PenaltyFamily::none, 0.0, 0.0}; }

  // Same family and shape at a different lambda.
  PenaltySpec with_lambda(double l) const { return {family, l, shape}; }

  // Throws std::domain_error when lambda < 0, SCAD a <= 2 or MCP b <= 0.
  void validate() const;
};

double penalty_value(double theta, const PenaltySpec& spec);

struct PenaltySlope {
  double value = 0.0;
  // Set when theta == 0 and the right limit P'(0+) = lambda was returned.
  bool right_limit = false;
};

// sgn(theta) P'(|theta|); at theta == 0 returns the right limit, flagged.
PenaltySlope penalty_deriv(double theta, const PenaltySpec& spec);

// Convex part H of the decomposition P(theta) = lambda|theta| - H(theta) for SCAD.
double dc_h_value(double theta, double lambda, double a);
double dc_h_deriv(double theta, double lambda, double a);

// Same decomposition dispatched on family (SCAD or MCP; zero for L1 and none).
double dc_h_value(double theta, const PenaltySpec& spec);
double dc_h_deriv(double theta, const PenaltySpec& spec);

// LLA weights w_j = P'(|beta_j|) with P'(0) = lambda.
Eigen::VectorXd lla_weights(const Eigen::VectorXd& beta, const PenaltySpec& spec);

double total_penalty(const Eigen::VectorXd& beta, const PenaltySpec& spec);

}  // namespace plexp
