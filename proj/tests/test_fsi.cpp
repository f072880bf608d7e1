#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "lubelastic/errors.hpp"
#include "lubelastic/fsi.hpp"

using namespace lubelastic;

namespace {

FsiParams small_params(double eps = 0.25, int n = 16, int m = 16) {
  FsiParams p;
  p.model.eps = eps;
  p.grid = PeriodicGrid(1, n);
  p.vnodes = std::make_shared<const VerticalNodes>(m);
  p.dt = 1e-3;
  p.forcing = single_harmonic_forcing(1.0, TimeRamp{TimeRamp::Kind::gaussian, 0.02});
  return p;
}

double max_abs(const PeriodicField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double state_max(const FsiState& s) {
  double m = std::max(max_abs(s.eta), max_abs(s.eta_t));
  for (const auto& c : s.v) m = std::max(m, c.max_abs());
  return std::max(m, s.p.max_abs());
}

double state_distance(const FsiState& a, const FsiState& b) {
  double m = std::max(max_abs(a.eta - b.eta), max_abs(a.eta_t - b.eta_t));
  for (std::size_t c = 0; c < a.v.size(); ++c) m = std::max(m, (a.v[c] - b.v[c]).max_abs());
  return std::max(m, (a.p - b.p).max_abs());
}

}  // namespace

TEST_CASE("parameter validation") {
  FsiParams p = small_params();
  CHECK_NOTHROW(p.validate());

  FsiParams drift = p;
  drift.model.v_D = 1.0;
  CHECK_THROWS_AS(drift.validate(), InvalidParameter);

  FsiParams wrong_tau = p;
  wrong_tau.model.tau = Exponent(0);
  CHECK_THROWS_AS(wrong_tau.validate(), InvalidRegime);

  FsiParams wrong_dim = p;
  wrong_dim.grid = PeriodicGrid(2, 16);
  CHECK_THROWS_AS(wrong_dim.validate(), GridMismatch);

  FsiParams unresolved = p;
  ForcingHarmonic h;
  h.k = {8, 0};
  unresolved.forcing = Forcing({h}, TimeRamp{});
  CHECK_THROWS_AS(unresolved.validate(), InvalidParameter);

  CHECK_THROWS_AS(run_fsi(p, 0.0), InvalidParameter);
  CHECK_THROWS(assemble_mode_system(p, {40, 0}, 1e-3));
}

TEST_CASE("zero forcing keeps the zero state") {
  FsiParams p = small_params();
  p.forcing = Forcing();
  const FsiRun run = run_fsi(p, 0.01, 2);
  REQUIRE(run.snapshots.size() == 6);
  for (const auto& s : run.snapshots) CHECK(state_max(s) == 0.0);
  for (const auto& e : run.ledger.entries) {
    CHECK(e.total_energy() == 0.0);
    CHECK(e.cum_viscous == 0.0);
  }
}

TEST_CASE("single harmonic forcing stays on its wavenumbers") {
  FsiParams p = small_params();
  FsiSolver solver(p);
  for (int i = 0; i < 20; ++i) solver.step();
  const auto modes = solver.active_modes();
  REQUIRE(modes.size() == 2);
  CHECK(modes[0] == Wavevector{-1, 0});
  CHECK(modes[1] == Wavevector{1, 0});

  const FsiState s = solver.state();
  const Spectrum eh = forward(s.eta);
  const double peak = std::abs(eh[1]);
  CHECK(peak > 0.0);
  for (std::size_t i = 0; i < eh.size(); ++i) {
    const int k = p.grid.wavenumber(static_cast<int>(i));
    if (std::abs(k) != 1) CHECK(std::abs(eh[i]) <= 1e-14 * peak);
  }
  CHECK(std::abs(eh[1] - std::conj(eh[p.grid.n - 1])) <= 1e-15 * peak);
}

TEST_CASE("discrete energy identity") {
  FsiParams p = small_params();
  p.model.theta = 0.3;
  p.model.rho_s = 2.0;
  FsiSolver solver(p);
  for (int i = 0; i < 40; ++i) solver.step();
  const auto& E = solver.ledger().entries;
  REQUIRE(E.size() == 41);
  double scale = 0.0;
  for (const auto& e : E) scale = std::max(scale, std::abs(e.work) + e.total_energy());
  for (std::size_t n = 1; n < E.size(); ++n) {
    const auto& e = E[n];
    const double dE = e.total_energy() - E[n - 1].total_energy();
    const double residual = dE + e.viscous + e.viscoelastic - e.work;
    CHECK(residual <= 1e-12 * scale);
    CHECK(std::abs(residual + e.numerical) <= 1e-10 * scale);
    CHECK(e.numerical >= 0.0);
    CHECK(e.viscous >= 0.0);
    CHECK(e.viscoelastic >= 0.0);
  }
  CHECK(E.back().cum_work > 0.0);

  // bending and plate energies recomputed from the nodal state
  const FsiState s = solver.state();
  const double T = p.model.time_scale();
  const double lap = l2_norm(laplacian(s.eta));
  const double bend = 0.5 * p.model.rigidity() * lap * lap;
  const double vel = l2_norm(s.eta_t) / T;
  const double plate = 0.5 * p.model.plate_density() * vel * vel;
  CHECK(E.back().bending == doctest::Approx(bend).epsilon(1e-10));
  CHECK(E.back().kinetic_plate == doctest::Approx(plate).epsilon(1e-10));
}

TEST_CASE("small time steps reduce the operator to its inertia blocks") {
  FsiParams p = small_params(0.25, 16, 10);
  const Wavevector k{2, 0};
  const Eigen::MatrixXcd M = mass_operator(p, k);
  auto defect = [&](double dt) {
    const Eigen::MatrixXcd A = assemble_mode_system(p, k, dt).matrix();
    return (dt * A - M).norm() / M.norm();
  };
  const double d1 = defect(1e-6);
  const double d2 = defect(5e-7);
  CHECK(d1 < 1e-2);
  CHECK(d1 / d2 == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("viscous block is symmetric positive semidefinite") {
  for (int m : {6, 11, 16}) {
    FsiParams p = small_params(0.125, 16, m);
    for (const Wavevector& k : {Wavevector{0, 0}, Wavevector{3, 0}}) {
      const Eigen::MatrixXd A = viscous_block(p, k);
      CHECK((A - A.transpose()).norm() <= 1e-13 * A.norm());
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
      CHECK(es.eigenvalues().minCoeff() >= -1e-12 * es.eigenvalues().maxCoeff());
    }
  }
}

TEST_CASE("mean displacement is conserved under mean forcing") {
  FsiParams p = small_params();
  ForcingHarmonic f1;
  f1.k = {0, 0};
  f1.sine = false;
  ForcingHarmonic f3 = f1;
  f3.component = 1;
  f3.profile = {1.0, 2.0};
  ForcingHarmonic wave;
  p.forcing = Forcing({f1, f3, wave}, TimeRamp{TimeRamp::Kind::step, 0.1});
  FsiSolver solver(p);
  for (int i = 0; i < 10; ++i) solver.step();
  const FsiState s = solver.state();
  CHECK(std::abs(mean_value(s.eta)) <= 1e-15);
  CHECK(solver.diagnostics().eta_mean <= 1e-15);
  // the mean horizontal forcing drives a nonzero mean flow
  CHECK(std::abs(mean_value(s.v[0].level(p.vnodes->size() / 2))) > 1e-6);
}

TEST_CASE("state invariants") {
  FsiParams p = small_params(0.125);
  const FsiRun run = run_fsi(p, 0.02, 5);
  CHECK(run.worst.divergence_ratio <= 1e-9);
  CHECK(run.worst.top_horizontal <= 1e-13);
  CHECK(run.worst.kinematic <= 1e-13 * std::max(1.0, max_abs(run.snapshots.back().eta_t)));
  CHECK(run.worst.eta_mean <= 1e-15);
  const int m = p.vnodes->size();
  for (const auto& s : run.snapshots) {
    CHECK(std::abs(mean_value(s.eta)) <= 1e-15);
    CHECK(s.v[1].level(0).max() == 0.0);
    CHECK(s.v[0].level(m - 1).max() == 0.0);
  }
  CHECK(run.regime.pass);
}

TEST_CASE("response is linear in the forcing") {
  FsiParams p = small_params();
  FsiParams q = p;
  const double a = 3.7;
  q.forcing = p.forcing.scaled(a);
  const FsiRun r1 = run_fsi(p, 0.01, 10);
  const FsiRun r2 = run_fsi(q, 0.01, 10);
  const FsiState& s1 = r1.snapshots.back();
  FsiState s2 = r2.snapshots.back();
  const double scale = state_max(s2);
  s2.eta *= 1.0 / a;
  s2.eta_t *= 1.0 / a;
  for (auto& c : s2.v) c *= 1.0 / a;
  s2.p *= 1.0 / a;
  CHECK(state_distance(s1, s2) <= 1e-12 * scale);
}

TEST_CASE("restarting from a nodal state reproduces the trajectory") {
  FsiParams p = small_params();
  FsiSolver a(p);
  for (int i = 0; i < 5; ++i) a.step();
  const FsiState mid = a.state();
  a.step();
  const FsiState next = step_fsi(p, mid);
  CHECK(next.t == doctest::Approx(a.time()));
  CHECK(state_distance(next, a.state()) <= 1e-12 * state_max(next));
}

TEST_CASE("first-order convergence in time") {
  FsiParams p = small_params(0.25, 16, 12);
  const double T_end = 0.1;
  std::vector<PeriodicField> eta;
  // the k=1 plate mode relaxes at a rate of about 5e3, so dt must resolve it
  for (double dt : {1e-4, 5e-5, 2.5e-5}) {
    p.dt = dt;
    eta.push_back(run_fsi(p, T_end, 1000).snapshots.back().eta);
  }
  const double d1 = l2_norm(eta[0] - eta[1]);
  const double d2 = l2_norm(eta[1] - eta[2]);
  CHECK(d1 / d2 >= 1.7);
  CHECK(d1 / d2 <= 2.3);
}

TEST_CASE("terminal energy scales like eps^3 at fixed rescaled horizon") {
  // κ = 3 gives T = 1, so the rescaled and physical horizons coincide
  auto energy = [](double eps) {
    FsiParams p = small_params(eps, 16, 16);
    p.model.kappa = Exponent(3);
    p.model.tau = Exponent(0);
    p.dt = 1e-4;
    const FsiRun run = run_fsi(p, 0.02, 1000);
    CHECK_FALSE(run.regime.pass);
    return run.ledger.entries.back().total_energy();
  };
  const double ratio = energy(0.125) / energy(0.0625);
  CHECK(ratio >= 6.0);
  CHECK(ratio <= 10.0);
}

TEST_CASE("two horizontal dimensions") {
  FsiParams p;
  p.model.eps = 0.125;
  p.model.dim = 2;
  p.grid = PeriodicGrid(2, 16);
  p.vnodes = std::make_shared<const VerticalNodes>(12);
  p.dt = 1e-3;
  ForcingHarmonic f1;
  f1.k = {1, 1};
  ForcingHarmonic f2;
  f2.component = 1;
  f2.k = {0, 2};
  f2.sine = false;
  p.forcing = Forcing({f1, f2}, TimeRamp{TimeRamp::Kind::gaussian, 0.01});
  FsiSolver solver(p);
  for (int i = 0; i < 10; ++i) solver.step();
  CHECK(solver.active_modes().size() == 4);
  const auto d = solver.diagnostics();
  CHECK(d.divergence_ratio <= 1e-9);
  CHECK(d.top_horizontal <= 1e-13);
  const FsiState s = solver.state();
  CHECK(s.v.size() == 3);
  CHECK(max_abs(s.eta) > 0.0);
  const Spectrum eh = forward(s.eta);
  const double peak = std::abs(eh[p.grid.index_of({1, 1})]) + std::abs(eh[p.grid.index_of({0, 2})]);
  for (std::size_t i = 0; i < eh.size(); ++i) {
    const Wavevector k = p.grid.wavevector(i);
    const bool on = (std::abs(k[0]) == 1 && k[1] == k[0]) || (k[0] == 0 && std::abs(k[1]) == 2);
    if (!on) CHECK(std::abs(eh[i]) <= 1e-14 * peak);
  }
  const auto& E = solver.ledger().entries;
  for (std::size_t n = 1; n < E.size(); ++n) {
    const double residual = E[n].total_energy() - E[n - 1].total_energy() + E[n].viscous + E[n].viscoelastic - E[n].work;
    CHECK(residual <= 1e-12 * (std::abs(E[n].work) + E[n].total_energy()));
  }
}
