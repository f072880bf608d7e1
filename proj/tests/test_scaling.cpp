#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "lubelastic/errors.hpp"
#include "lubelastic/scaling.hpp"

using namespace lubelastic;

TEST_CASE("time scale exponent") {
  CHECK(time_scale_exponent(Exponent(3)) == Exponent(0));
  CHECK(time_scale_exponent(Exponent(1)) == Exponent(-2));
  CHECK(time_scale_exponent(Exponent(2)) == Exponent(-1));
  CHECK(time_scale_exponent(Exponent(5, 2)) == Exponent(-1, 2));
  CHECK_THROWS_AS(time_scale_exponent(Exponent(0)), InvalidRegime);
  CHECK_THROWS_AS(time_scale_exponent(Exponent(-1, 3)), InvalidRegime);

  // affine with unit slope
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> num(1, 60);
  for (int i = 0; i < 50; ++i) {
    const Exponent a(num(rng), 4);
    const Exponent b(num(rng), 6);
    CHECK(time_scale_exponent(a) - time_scale_exponent(b) == a - b);
  }
}

TEST_CASE("exponent arithmetic and parsing") {
  CHECK(Exponent::parse("5/2") == Exponent(5, 2));
  CHECK(Exponent::parse("2.5") == Exponent(5, 2));
  CHECK(Exponent::parse("-1") == Exponent(-1));
  CHECK(Exponent(4, 8) == Exponent(1, 2));
  CHECK(Exponent(1, -2) == Exponent(-1, 2));
  CHECK(Exponent(5, 2).str() == "5/2");
  CHECK_THROWS_AS(Exponent::parse("abc"), InvalidParameter);
  CHECK_THROWS_AS(Exponent::parse("1/0"), InvalidParameter);
}

TEST_CASE("powers of eps are exact on dyadic ladders") {
  CHECK(pow_eps(0.125, Exponent(-2)) == 64.0);
  CHECK(pow_eps(0.25, Exponent(5, 2)) == 1.0 / 32.0);
  CHECK(pow_eps(1.0 / 64, Exponent(-1, 2)) == 8.0);
  CHECK(pow_eps(0.1, Exponent(2)) == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("theorem regime") {
  CHECK(validate_theorem_regime(Exponent(5, 2)).pass);
  CHECK(validate_theorem_regime(Exponent(1, 10)).pass);
  const auto three = validate_theorem_regime(Exponent(3));
  CHECK_FALSE(three.pass);
  CHECK_FALSE(three.warn);
  CHECK(three.reason.find("5/2") != std::string::npos);
  const auto between = validate_theorem_regime(Exponent(11, 4));
  CHECK_FALSE(between.pass);
  CHECK(between.warn);
  CHECK_FALSE(validate_theorem_regime(Exponent(0)).pass);
  CHECK(validate_theorem_regime(2.5).pass);
  CHECK_FALSE(validate_theorem_regime(3.0).pass);
}

TEST_CASE("reduced coefficients") {
  CHECK(reduced_coefficient_e0(1, 1) == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  CHECK(reduced_coefficient_e0(12, 1) == 1.0);
  CHECK(reduced_coefficient_e0(3, 0.25) == 1.0);
  CHECK_THROWS_AS(reduced_coefficient_e0(0, 1), InvalidParameter);
  CHECK_THROWS_AS(reduced_coefficient_e0(1, -1), InvalidParameter);

  CHECK(reduced_coefficient_eh({1, 1}, 1) == 4.0 / 27.0);
  CHECK(reduced_coefficient_eh({1, 0}, 1) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  CHECK(std::abs(reduced_coefficient_eh({1, 1e6}, 1) - 2.0 / 9.0) < 1e-5);
  CHECK_THROWS_AS(reduced_coefficient_eh({0, 1}, 1), InvalidParameter);
  CHECK_THROWS_AS(reduced_coefficient_eh({1, 1}, 0), InvalidParameter);

  double prev = 0.0;
  for (double la = 0.0; la < 100.0; la += 0.37) {
    const double c = reduced_coefficient_eh({1.3, la}, 0.7);
    CHECK(c > prev);
    prev = c;
  }
  for (double a : {0.5, 2.0, 7.0}) {
    CHECK(reduced_coefficient_e0(2.0, a * 0.3) == doctest::Approx(reduced_coefficient_e0(2.0, 0.3) / a));
    CHECK(reduced_coefficient_eh({1.5, 2.0}, a * 0.3) ==
          doctest::Approx(reduced_coefficient_eh({1.5, 2.0}, 0.3) / a));
  }
}

TEST_CASE("Reynolds number") {
  CHECK(reynolds_number(1, 1, 1, 1) == 1.0);
  CHECK(reynolds_number(2, 3, 1, 2) == 9.0);
  const NonlinearScalingPreset preset;
  CHECK(reynolds_number(1, 1, 1, preset.time_scale(0.1)) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK_THROWS_AS(reynolds_number(0, 1, 1, 1), InvalidParameter);
}

TEST_CASE("nonlinear preset exponents") {
  const NonlinearScalingPreset p{2.0, 3.0, 5.0};
  CHECK(p.rigidity(0.25) == 8.0);
  CHECK(p.viscoelasticity(0.25) == 48.0);
  CHECK(p.plate_density(0.25) == 20.0);
  CHECK(p.time_scale(0.25) == 16.0);
  CHECK_THROWS_AS((NonlinearScalingPreset{0.0, 1.0, 1.0}.validate()), InvalidParameter);
}

TEST_CASE("model parameters") {
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  CHECK(p.time_scale() == 8.0);
  CHECK(p.rigidity() == 64.0);
  p.tau = Exponent(0);
  CHECK_THROWS_AS(p.validate(), InvalidRegime);
  CHECK_NOTHROW(p.validate(false));
  p = ModelParams{};
  p.eps = 1.0;
  CHECK_THROWS_AS(p.validate(), InvalidParameter);
  p = ModelParams{};
  p.theta = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidParameter);
}

TEST_CASE("model parameters JSON round trip") {
  ModelParams p;
  p.kappa = Exponent(5, 2);
  p.tau = Exponent(-1, 2);
  p.eps = 0.0625;
  p.theta = 0.3;
  const nlohmann::json j = p;
  CHECK(j["kappa"] == "5/2");
  const auto q = j.get<ModelParams>();
  CHECK(q.kappa == p.kappa);
  CHECK(q.tau == p.tau);
  CHECK(q.eps == p.eps);
  CHECK(q.theta == p.theta);

  const auto r = nlohmann::json::parse(R"({"kappa": 1})").get<ModelParams>();
  CHECK(r.tau == Exponent(-2));
  CHECK_THROWS_AS(nlohmann::json::parse(R"({"kapa": 1})").get<ModelParams>(), InvalidParameter);
}
