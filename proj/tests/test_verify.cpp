#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lubelastic/errors.hpp"
#include "lubelastic/verify.hpp"

using namespace lubelastic;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

ChannelField random_channel(const PeriodicGrid& g, std::shared_ptr<const VerticalNodes> vn, std::mt19937& rng) {
  std::normal_distribution<double> d;
  ChannelField c(g, vn);
  for (double& v : c.values()) v = d(rng);
  return c;
}

PeriodicField random_band_limited(const PeriodicGrid& g, std::mt19937& rng) {
  std::normal_distribution<double> d;
  const double a = d(rng), b = d(rng), c = d(rng);
  return PeriodicField::sample(g, [=](double x, double) {
    return a * std::sin(two_pi * x) + b * std::cos(2 * two_pi * x) + c * std::sin(3 * two_pi * x);
  });
}

std::vector<ErrorReport> power_law(double rate, double noise = 0.0, unsigned seed = 1) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-noise, noise);
  std::vector<ErrorReport> out;
  for (double e : {0.125, 0.0625, 0.03125, 0.015625}) {
    ErrorReport r;
    r.eps = e;
    r.kappa = Exponent(2);
    r.err_velocity = std::pow(e, rate) * (1.0 + u(rng));
    r.err_pressure = 2.0 * std::pow(e, rate);
    r.err_displacement = std::pow(e, rate);
    out.push_back(r);
  }
  return out;
}

FsiParams audit_params(double eps) {
  FsiParams p;
  p.model.eps = eps;
  p.grid = PeriodicGrid(1, 16);
  p.vnodes = std::make_shared<const VerticalNodes>(12);
  p.dt = 2.5e-5;
  p.forcing = single_harmonic_forcing(1.0, TimeRamp{TimeRamp::Kind::gaussian, 0.02});
  return p;
}

}  // namespace

TEST_CASE("thin L2(0,T;L2) norm examples") {
  const PeriodicGrid g(1, 16);
  const auto vn = std::make_shared<const VerticalNodes>(8);
  const std::vector<double> times{0.0, 1.0};
  CHECK(thin_norm_L2L2(std::vector<ChannelField>{ChannelField(g, vn), ChannelField(g, vn)}, 0.3, times) == 0.0);

  const ChannelField one(g, vn, 1.0);
  CHECK(thin_norm_L2L2(std::vector<ChannelField>{one, one}, 0.25, times) == doctest::Approx(0.5).epsilon(1e-14));

  ChannelField s(g, vn);
  for (int j = 0; j < vn->size(); ++j) {
    for (std::size_t h = 0; h < g.size(); ++h) s.at(j, h) = std::sin(two_pi * g.coordinate(h)[0]);
  }
  CHECK(thin_norm_L2L2(std::vector<ChannelField>{s, s}, 1.0, times) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));

  CHECK_THROWS_AS(thin_norm_L2L2(std::vector<ChannelField>{one}, 0.25, times), GridMismatch);
  CHECK_THROWS_AS(thin_norm_L2L2(std::vector<ChannelField>{one, one}, 0.25, {1.0, 0.0}), InvalidParameter);
}

TEST_CASE("thin norm is a norm") {
  const PeriodicGrid g(2, 8);
  const auto vn = std::make_shared<const VerticalNodes>(6);
  std::mt19937 rng(3);
  const std::vector<double> times{0.0, 0.3, 0.5};
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::vector<ChannelField>> a, b, sum, scaled;
    for (std::size_t i = 0; i < times.size(); ++i) {
      a.push_back({random_channel(g, vn, rng), random_channel(g, vn, rng)});
      b.push_back({random_channel(g, vn, rng), random_channel(g, vn, rng)});
      sum.push_back({a[i][0] + b[i][0], a[i][1] + b[i][1]});
      scaled.push_back({-2.5 * a[i][0], -2.5 * a[i][1]});
    }
    const double na = thin_norm_L2L2(a, 0.1, times);
    const double nb = thin_norm_L2L2(b, 0.1, times);
    CHECK(thin_norm_L2L2(sum, 0.1, times) <= na + nb);
    CHECK(thin_norm_L2L2(scaled, 0.1, times) == doctest::Approx(2.5 * na).epsilon(1e-14));
  }
}

TEST_CASE("L-infinity H2 norm") {
  const PeriodicGrid g(1, 32);
  CHECK(norm_LinfH2({PeriodicField(g), PeriodicField(g)}) == 0.0);
  const auto c = PeriodicField::sample(g, [](double x, double) { return std::cos(two_pi * x); });
  const double K2 = two_pi * two_pi;
  const double expected = std::sqrt(0.5 * (1.0 + K2 + K2 * K2));
  CHECK(norm_LinfH2({c}) == doctest::Approx(expected).epsilon(1e-13));

  std::mt19937 rng(11);
  std::vector<PeriodicField> traj{c};
  double prev = norm_LinfH2(traj);
  for (int i = 0; i < 5; ++i) {
    traj.push_back(random_band_limited(g, rng));
    const double now = norm_LinfH2(traj);
    CHECK(now >= prev);
    prev = now;
  }
  for (int i = 0; i < 10; ++i) {
    const PeriodicField a = random_band_limited(g, rng), b = random_band_limited(g, rng);
    CHECK(norm_LinfH2({a + b}) <= norm_LinfH2({a}) + norm_LinfH2({b}) + 1e-12);
    CHECK(norm_LinfH2({-3.0 * a}) == doctest::Approx(3.0 * norm_LinfH2({a})).epsilon(1e-13));
  }
}

TEST_CASE("rate fit") {
  const RateFit f3 = fit_rate(power_law(3.0), ErrorNorm::velocity);
  CHECK(f3.slope == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f3.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f3.points.front().first > f3.points.back().first);
  CHECK(fit_rate(power_law(2.5), ErrorNorm::displacement).slope == doctest::Approx(2.5).epsilon(1e-12));

  for (unsigned seed = 1; seed <= 20; ++seed) {
    const double s = fit_rate(power_law(3.0, 0.05, seed), ErrorNorm::velocity).slope;
    CHECK(s >= 2.9);
    CHECK(s <= 3.1);
  }

  // rescaling all errors leaves the slope unchanged
  const auto base = power_law(3.0, 0.05, 4);
  auto scaled = base;
  for (auto& r : scaled) r.err_velocity *= 17.0;
  CHECK(fit_rate(scaled, ErrorNorm::velocity).slope ==
        doctest::Approx(fit_rate(base, ErrorNorm::velocity).slope).epsilon(1e-12));
  CHECK(fit_rate(base, ErrorNorm::pressure).slope == doctest::Approx(3.0).epsilon(1e-12));

  auto zero = base;
  zero[2].err_velocity = 0.0;
  CHECK_THROWS_AS(fit_rate(zero, ErrorNorm::velocity), DegenerateFit);
  CHECK_THROWS_AS(fit_rate({base[0], base[1]}, ErrorNorm::velocity), InvalidParameter);
  auto mixed = base;
  mixed[1].kappa = Exponent(1);
  CHECK_THROWS_AS(fit_rate(mixed, ErrorNorm::velocity), InvalidParameter);
}

TEST_CASE("energy audit") {
  FsiParams quiet = audit_params(0.125);
  quiet.forcing = Forcing();
  const FsiRun still = run_fsi(quiet, 0.005);
  const EnergyAudit a0 = energy_audit(still.ledger);
  for (double r : a0.ratios) CHECK(r == 0.0);

  const FsiRun run = run_fsi(audit_params(0.125), 0.02);
  const EnergyAudit a = energy_audit(run.ledger);
  CHECK(a.worst_slack >= -1e-12);
  CHECK(a.terminal_ratio > 0.0);
  CHECK(a.ratios.size() == run.ledger.entries.size() - 1);

  EnergyLedger broken = run.ledger;
  for (auto& e : broken.entries) e.viscous = -e.viscous;
  try {
    energy_audit(broken);
    FAIL("corrupted ledger passed the audit");
  } catch (const AuditFailure& e) {
    CHECK(e.step() == 1);
  }

  EnergyLedger gained = run.ledger;
  gained.entries[5].kinetic_fluid += 1e-3 * gained.entries[5].total_energy() + 1e-12;
  CHECK_THROWS_AS(energy_audit(gained), AuditFailure);
}

TEST_CASE("audit ratio is roughly eps-independent") {
  const double r1 = energy_audit(run_fsi(audit_params(0.125), 0.05).ledger).terminal_ratio;
  const double r2 = energy_audit(run_fsi(audit_params(0.0625), 0.05).ledger).terminal_ratio;
  CHECK(std::max(r1, r2) / std::min(r1, r2) <= 3.0);
}

TEST_CASE("comparison of trajectories") {
  const FsiParams p = audit_params(0.125);
  const FsiRun run = run_fsi(p, 0.005, 50);
  const ErrorReport self = compare(run.snapshots, run.snapshots, p.model);
  CHECK(self.err_velocity == 0.0);
  CHECK(self.err_pressure == 0.0);
  CHECK(self.err_displacement == 0.0);

  auto shifted = run.snapshots;
  shifted.back().t += 1e-3;
  CHECK_THROWS_AS(compare(run.snapshots, shifted, p.model), GridMismatch);
  CHECK_THROWS_AS(compare(run.snapshots, {run.snapshots[0]}, p.model), GridMismatch);
}

TEST_CASE("ladder validation") {
  LadderSpec s;
  s.forcing = single_harmonic_forcing(1.0, TimeRamp{});
  CHECK_THROWS_AS(s.validate(), InvalidParameter);
  s.eps = {0.125, 0.25};
  CHECK_THROWS_AS(s.validate(), InvalidParameter);
  s.eps = {0.25, 0.125};
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("small rate study") {
  LadderSpec s;
  s.model.theta = 0.01;
  s.eps = {0.25, 0.125, 0.0625};
  s.forcing = single_harmonic_forcing(1.0, TimeRamp{TimeRamp::Kind::gaussian, 0.05});
  s.n = 16;
  s.m = 10;
  s.dt = 1e-4;
  s.T_end = 0.1;
  s.samples = 10;
  s.reduced_dt = 1e-5;
  std::vector<std::string> log;
  const RateStudy study = run_rate_study(s, 2, [&](const std::string& m) { log.push_back(m); });
  REQUIRE(study.reports.size() == 3);
  for (const auto& r : study.reports) {
    CHECK(r.err_velocity > 0.0);
    CHECK(r.err_pressure > 0.0);
    CHECK(r.err_displacement > 0.0);
    CHECK(r.steps == 1000);
  }
  CHECK(study.reports[0].eps == 0.25);
  CHECK(study.velocity.slope > 1.0);
  CHECK(study.refinement.ran);
  CHECK(study.closure <= 1e-8);
  CHECK(study.audits.size() == 3);
  CHECK_FALSE(log.empty());

  const nlohmann::json j = study;
  CHECK(j.at("reports").size() == 3);
  CHECK(j.at("rates").contains("velocity"));
}
