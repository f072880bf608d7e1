// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <thread>

#include "lubelastic/errors.hpp"
#include "lubelastic/experiment.hpp"
#include "lubelastic/reconstruction.hpp"
#include "lubelastic/thinfilm.hpp"
#include "lubelastic/verify.hpp"

using namespace lubelastic;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Verdict()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!v.pass) ++failures;
  std::printf("%s [%d] %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0, double e = 0, double g = 0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a, b, c, d, e, g);
  return buf;
}

double max_abs(const PeriodicField& f) { return std::max(std::abs(f.max()), std::abs(f.min())); }

}  // namespace

int main() {
  const ExperimentConfig theorem = preset_config("theorem-e0-kappa2");
  const int jobs = std::max(1u, std::thread::hardware_concurrency());
  std::optional<RateStudy> study;
  std::string study_error;

  report(1, "rate reproduction (kappa=2, eps=1/8..1/64)", [&] {
    try {
      study = run_rate_study(theorem.ladder(), jobs);
    } catch (const std::exception& e) {
      study_error = e.what();
      throw;
    }
    const auto& t = theorem.thresholds;
    const auto& s = *study;
    const bool pass = s.velocity.slope >= t.velocity && s.pressure.slope >= t.pressure &&
                      s.displacement.slope >= t.displacement && s.velocity.r2 >= t.r2 && s.pressure.r2 >= t.r2 &&
                      s.displacement.r2 >= t.r2;
    return Verdict{pass, fmt("slopes v=%.3f (r2 %.4f) p=%.3f (r2 %.4f) eta=%.3f (r2 %.4f)", s.velocity.slope,
                             s.velocity.r2, s.pressure.slope, s.pressure.r2, s.displacement.slope,
                             s.displacement.r2) +
                             (s.refinement.pass ? ", refinement pre-pass ok" : ", refinement pre-pass FAILED")};
  });

  report(2, "discrete energy inequality over the ladder", [&] {
    if (!study) return Verdict{false, "no study: " + study_error};
    double worst = 0.0;
    for (const auto& a : study->audits) worst = std::min(worst, a.worst_slack);
    const bool pass = worst >= -1e-12 && study->energy_spread <= theorem.thresholds.energy_spread &&
                      study->audits.size() == study->reports.size();
    return Verdict{pass, fmt("worst relative slack %.3e, terminal ratio spread %.5f", worst, study->energy_spread)};
  });

  report(3, "exact single-mode sixth-order decay", [] {
    const double B = 1.0, nu = 500.0;
    const double c = reduced_coefficient_e0(B, nu);
    const PeriodicGrid g(1, 32);
    const auto eta0 = PeriodicField::sample(g, [](double x, double) { return std::cos(two_pi * x); });
    const auto traj = solve_linear_sixth(c, {}, eta0, 1.0, 0.1, 1);
    double worst = 0.0;
    for (const double t : {0.1, 1.0}) {
      const auto it = std::find_if(traj.begin(), traj.end(), [t](const FilmState& s) { return std::abs(s.t - t) < 1e-12; });
      if (it == traj.end()) return Verdict{false, "missing snapshot"};
      const PeriodicField exact = std::exp(-c * std::pow(two_pi, 6) * t) * eta0;
      worst = std::max(worst, l2_norm(it->eta - exact) / l2_norm(exact));
    }
    return Verdict{worst <= 1e-8, fmt("c=B/(12 nu)=%.6e, worst relative error %.3e", c, worst)};
  });

  report(4, "conservation and dissipation of the film family", [] {
    const PeriodicGrid g(1, 64);
    const auto eta0 = PeriodicField::sample(g, [](double x, double) { return 1.0 + 0.3 * std::sin(two_pi * x); });
    const double mass0 = mean_value(eta0);
    double drift = 0.0, rise = -INFINITY;
    bool ok = true;
    for (int alpha : {1, 3, 5}) {
      for (double vD : {0.0, 1.0}) {
        ThinFilmModel model;
        model.alpha = alpha;
        model.c = 1.0 / std::pow(two_pi, alpha + 1);
        model.v_D = vD;
        FilmState s{eta0, 0.0};
        double e = film_energy(model, s.eta);
        for (int n = 0; n < 1000; ++n) {
          s = step(model, s, 1e-3);
          drift = std::max(drift, std::abs(mean_value(s.eta) - mass0) / (1.0 + std::abs(mass0)));
          if (alpha == 5 && vD == 0.0 && s.eta.min() >= 0.1) {
            const double en = film_energy(model, s.eta);
            rise = std::max(rise, en - e);
            if (en > e + 1e-10) ok = false;
            e = en;
          }
        }
      }
    }
    ok = ok && drift <= 1e-10;
    return Verdict{ok, fmt("max relative mass drift %.3e, max per-step energy change %.3e", drift, rise)};
  });

  report(5, "stationary Reynolds solve against a refined solve", [] {
    auto profile = [](double x, double) { return 1.0 + 0.5 * std::sin(two_pi * x); };
    const PeriodicGrid coarse(1, 256), fine(1, 4096);
    const PeriodicField p = solve_reynolds_stationary(PeriodicField::sample(coarse, profile), 1.0);
    const PeriodicField q = solve_reynolds_stationary(PeriodicField::sample(fine, profile), 1.0);
    PeriodicField qs(coarse);
    for (std::size_t i = 0; i < coarse.size(); ++i) qs[i] = q[i * 16];
    const double rel = l2_norm(p - qs) / l2_norm(qs);
    return Verdict{rel <= 1e-6, fmt("relative L2 difference %.3e", rel)};
  });

  report(6, "derivation-chain closure on the rate preset", [&] {
    if (!study) return Verdict{false, "no study: " + study_error};
    return Verdict{study->closure <= 1e-6, fmt("relative flux residual %.3e", study->closure)};
  });

  report(7, "coefficient maps", [] {
    const double eh = reduced_coefficient_eh(LameParams{1.0, 1.0}, 1.0);
    const bool pass = eh == 4.0 / 27.0 && time_scale_exponent(3.0) == 0.0 && time_scale_exponent(1.0) == -2.0 &&
                      time_scale_exponent(Exponent(3)) == Exponent(0) &&
                      time_scale_exponent(Exponent(1)) == Exponent(-2);
    return Verdict{pass, fmt("eh(1,1,1)=%.17g, tau(3)=%g, tau(1)=%g", eh, time_scale_exponent(3.0),
                             time_scale_exponent(1.0))};
  });

  report(8, "3D smoke run", [] {
    const ExperimentConfig c = preset_config("fsi-3d-smoke");
    const FsiParams params = c.fsi_params();
    const FsiRun run = run_fsi(params, c.time.T_end, c.time.output_every);
    const EnergyAudit audit = energy_audit(run.ledger);
    const auto& last = run.snapshots.back();
    const int m = params.vnodes->size();
    bool walls = true;
    for (const auto& s : run.snapshots) {
      for (std::size_t a = 0; a < s.v.size(); ++a) walls = walls && max_abs(s.v[a].level(0)) == 0.0;
      for (int a = 0; a < params.grid.dim; ++a) walls = walls && max_abs(s.v[a].level(m - 1)) == 0.0;
      walls = walls && s.eta.finite() && std::abs(mean_value(s.eta)) <= 1e-15;
    }
    const auto& w = run.worst;
    const bool pass = walls && w.divergence_ratio <= 1e-9 && w.top_horizontal <= 1e-13 &&
                      w.kinematic <= 1e-13 * std::max(1.0, max_abs(last.eta_t)) && w.eta_mean <= 1e-15 &&
                      audit.worst_slack >= -1e-12 && audit.terminal_ratio > 0.0;
    return Verdict{pass, fmt("divergence %.2e, kinematic %.2e, worst slack %.2e, steps %g", w.divergence_ratio,
                             w.kinematic, audit.worst_slack, static_cast<double>(run.ledger.entries.back().step))};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
