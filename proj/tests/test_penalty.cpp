#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "plexp/penalty.hpp"

using plexp::PenaltySpec;

namespace {

// P(theta) = int_0^|theta| P'(t) dt by composite Simpson on the derivative.
double integrate_deriv(double theta, const PenaltySpec& s) {
  const int m = 20000;
  const double h = std::abs(theta) / m;
  double acc = 0.0;
  for (int k = 0; k <= m; ++k) {
    const double t = k * h;
    const double w = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    acc += w * plexp::penalty_deriv(t == 0.0 ? 1e-300 : t, s).value;
  }
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(PenaltySpec::scad(-1.0).validate(), std::domain_error);
  CHECK_THROWS_AS(PenaltySpec::scad(1.0, 2.0).validate(), std::domain_error);
  CHECK_THROWS_AS(PenaltySpec::mcp(1.0, 0.0).validate(), std::domain_error);
  CHECK_NOTHROW(PenaltySpec::l1(0.0).validate());
  CHECK(plexp::parse_penalty_family("mcp") == plexp::PenaltyFamily::mcp);
  CHECK_THROWS(plexp::parse_penalty_family("ridge"));
}

TEST_CASE("penalty values") {
  const auto scad = PenaltySpec::scad(1.0, 3.7);
  CHECK(plexp::penalty_value(0.0, scad) == 0.0);
  CHECK(plexp::penalty_value(4.0, scad) == doctest::Approx(2.35));
  CHECK(plexp::penalty_value(0.5, scad) == doctest::Approx(0.5));
  CHECK(plexp::penalty_value(-4.0, scad) == doctest::Approx(2.35));
  CHECK(plexp::penalty_value(0.5, PenaltySpec::mcp(1.0, 1.0)) == doctest::Approx(0.375));
  CHECK(plexp::penalty_value(7.0, PenaltySpec::mcp(1.0, 2.0)) == doctest::Approx(1.0));
  CHECK(plexp::penalty_value(-0.3, PenaltySpec::l1(2.0)) == doctest::Approx(0.6));
  CHECK(plexp::penalty_value(5.0, PenaltySpec::unpenalized()) == 0.0);
}

TEST_CASE("penalty value equals the integral of its derivative") {
  for (const auto& s : {PenaltySpec::scad(0.7, 3.7), PenaltySpec::scad(1.3, 2.5), PenaltySpec::mcp(0.9, 1.0),
                        PenaltySpec::mcp(0.4, 3.0)}) {
    for (double theta : {0.1, 0.69, 1.0, 1.7, 2.6, 4.0, 9.0}) {
      CHECK(plexp::penalty_value(theta, s) == doctest::Approx(integrate_deriv(theta, s)).epsilon(1e-7));
    }
  }
}

TEST_CASE("penalty derivatives") {
  const auto scad = PenaltySpec::scad(1.0, 3.7);
  CHECK(plexp::penalty_deriv(0.5, scad).value == doctest::Approx(1.0));
  CHECK(plexp::penalty_deriv(2.0, scad).value == doctest::Approx(1.7 / 2.7));
  CHECK(plexp::penalty_deriv(-2.0, scad).value == doctest::Approx(-1.7 / 2.7));
  CHECK(plexp::penalty_deriv(5.0, PenaltySpec::mcp(1.0, 1.0)).value == 0.0);
  const auto at0 = plexp::penalty_deriv(0.0, scad);
  CHECK(at0.right_limit);
  CHECK(at0.value == 1.0);
  CHECK_FALSE(plexp::penalty_deriv(0.1, scad).right_limit);
}

TEST_CASE("derivative matches finite differences away from kinks") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ut(-8.0, 8.0), ul(0.1, 2.0), ua(2.1, 6.0);
  int checked = 0;
  for (int k = 0; k < 4000; ++k) {
    const double lam = ul(rng), shape = ua(rng), theta = ut(rng);
    for (const auto& s : {PenaltySpec::scad(lam, shape), PenaltySpec::mcp(lam, shape - 2.0)}) {
      const double t = std::abs(theta);
      const double kink = s.family == plexp::PenaltyFamily::scad ? shape * lam : lam * s.shape;
      if (t < 1e-3 || std::abs(t - lam) < 1e-3 || std::abs(t - kink) < 1e-3) continue;
      const double h = 1e-6;
      const double fd = (plexp::penalty_value(theta + h, s) - plexp::penalty_value(theta - h, s)) / (2 * h);
      CHECK(std::abs(fd - plexp::penalty_deriv(theta, s).value) <= 1e-6 * std::max(1.0, std::abs(fd)));
      ++checked;
    }
  }
  CHECK(checked > 5000);
}

TEST_CASE("plateaus") {
  const auto scad = PenaltySpec::scad(0.5, 3.7);
  for (double t = 1.851; t < 10; t += 0.37) {
    CHECK(plexp::penalty_value(t, scad) == doctest::Approx(4.7 * 0.25 / 2));
    CHECK(plexp::penalty_deriv(t, scad).value == 0.0);
  }
  const auto mcp = PenaltySpec::mcp(0.5, 2.0);
  for (double t = 1.0; t < 10; t += 0.37) {
    CHECK(plexp::penalty_value(t, mcp) == doctest::Approx(0.25));
    CHECK(plexp::penalty_deriv(t, mcp).value == 0.0);
  }
}

TEST_CASE("DC decomposition") {
  CHECK(plexp::dc_h_value(0.0, 1.0, 3.7) == 0.0);
  CHECK(plexp::dc_h_deriv(0.0, 1.0, 3.7) == 0.0);
  CHECK(plexp::dc_h_value(2.0, 1.0, 3.7) == doctest::Approx(1.0 / 5.4));
  for (double t = -6.0; t <= 6.0; t += 0.1) {
    CHECK(std::abs(std::abs(t) - plexp::dc_h_value(t, 1.0, 3.7) -
                   plexp::penalty_value(t, PenaltySpec::scad(1.0, 3.7))) <= 1e-12);
  }
  // convexity by second differences
  const double h = 0.01;
  for (double t = -6.0; t <= 6.0; t += 0.013) {
    const double d2 = plexp::dc_h_value(t + h, 0.8, 3.0) - 2 * plexp::dc_h_value(t, 0.8, 3.0) +
                      plexp::dc_h_value(t - h, 0.8, 3.0);
    CHECK(d2 >= -1e-12);
  }
  // H' is continuous and equals lambda sgn - P'
  for (double t : {-4.0, -1.5, -0.3, 0.3, 1.5, 4.0}) {
    CHECK(plexp::dc_h_deriv(t, 1.0, 3.7) ==
          doctest::Approx((t > 0 ? 1.0 : -1.0) - plexp::penalty_deriv(t, PenaltySpec::scad(1.0, 3.7)).value));
  }
}

TEST_CASE("LLA weights") {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(4);
  CHECK(plexp::lla_weights(beta, PenaltySpec::scad(0.2)).isApprox(Eigen::VectorXd::Constant(4, 0.2)));
  beta << 10.0, -10.0, 0.3, 0.0;
  const Eigen::VectorXd w = plexp::lla_weights(beta, PenaltySpec::scad(0.2, 3.7));
  CHECK(w[0] == 0.0);
  CHECK(w[1] == 0.0);
  CHECK(w[2] == doctest::Approx((0.74 - 0.3) / 2.7));
  CHECK(w[3] == doctest::Approx(0.2));
  CHECK(plexp::lla_weights(beta, PenaltySpec::mcp(0.2, 1.0))[2] == 0.0);
  CHECK(plexp::lla_weights(beta, PenaltySpec::l1(0.2)).isApprox(Eigen::VectorXd::Constant(4, 0.2)));
  CHECK(plexp::total_penalty(beta, PenaltySpec::l1(0.5)) == doctest::Approx(0.5 * 20.3));
}
