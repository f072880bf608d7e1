#include "lubelastic/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

#include "lubelastic/errors.hpp"

namespace lubelastic {

namespace {

double trapezoid(const std::vector<double>& values, const std::vector<double>& times) {
  if (values.size() != times.size()) throw GridMismatch("time samples and values differ in length");
  if (times.size() < 2) throw InvalidParameter("time integration needs at least two samples");
  double s = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double h = times[i] - times[i - 1];
    if (!(h > 0.0)) throw InvalidParameter("time samples must increase");
    s += 0.5 * h * (values[i] + values[i - 1]);
  }
  return s;
}

}  // namespace

double thin_norm_L2L2(const std::vector<std::vector<ChannelField>>& samples, double eps,
                      const std::vector<double>& times) {
  if (!(eps > 0.0)) throw InvalidParameter("eps must be positive");
  std::vector<double> sq;
  sq.reserve(samples.size());
  for (const auto& components : samples) {
    double s = 0.0;
    for (const auto& c : components) {
      if (!c.compatible(components.front())) throw GridMismatch("components live on different grids");
      s += channel_l2_squared(c);
    }
    sq.push_back(eps * s);
  }
  return std::sqrt(trapezoid(sq, times));
}

double thin_norm_L2L2(const std::vector<ChannelField>& samples, double eps, const std::vector<double>& times) {
  std::vector<std::vector<ChannelField>> wrapped;
  wrapped.reserve(samples.size());
  for (const auto& s : samples) wrapped.push_back({s});
  return thin_norm_L2L2(wrapped, eps, times);
}

double norm_LinfH2(const std::vector<PeriodicField>& traj) {
  double worst = 0.0;
  for (const auto& eta : traj) {
    const auto& g = eta.grid();
    const Spectrum c = forward(eta);
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const auto k = g.wavevector(i);
      const double K2 = 4.0 * std::numbers::pi * std::numbers::pi * (double(k[0]) * k[0] + double(k[1]) * k[1]);
      s += (1.0 + K2 + K2 * K2) * std::norm(c[i]);
    }
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

const char* to_string(ErrorNorm which) {
  switch (which) {
    case ErrorNorm::velocity:
      return "velocity";
    case ErrorNorm::pressure:
      return "pressure";
    case ErrorNorm::displacement:
      return "displacement";
  }
  return "?";
}

RateFit fit_rate(const std::vector<ErrorReport>& reports, ErrorNorm which) {
  if (reports.size() < 3) throw InvalidParameter("rate fit needs at least three reports");
  RateFit fit;
  for (const auto& r : reports) {
    if (r.kappa != reports.front().kappa) throw InvalidParameter("reports mix different kappa");
    const double e = which == ErrorNorm::velocity   ? r.err_velocity
                     : which == ErrorNorm::pressure ? r.err_pressure
                                                    : r.err_displacement;
    if (e == 0.0) throw DegenerateFit(std::string("zero ") + to_string(which) + " error at eps=" + std::to_string(r.eps));
    if (!(e > 0.0) || !std::isfinite(e) || !(r.eps > 0.0)) throw InvalidParameter("errors and eps must be positive");
    fit.points.emplace_back(r.eps, e);
  }
  std::sort(fit.points.begin(), fit.points.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 1; i < fit.points.size(); ++i) {
    if (fit.points[i].first == fit.points[i - 1].first) throw InvalidParameter("duplicate eps in rate fit");
  }
  const double n = static_cast<double>(fit.points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [e, err] : fit.points) {
    sx += std::log(e);
    sy += std::log(err);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [e, err] : fit.points) {
    const double dx = std::log(e) - mx, dy = std::log(err) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

EnergyAudit energy_audit(const EnergyLedger& ledger, double tolerance) {
  const auto& E = ledger.entries;
  if (E.empty()) throw InvalidParameter("empty energy ledger");
  double scale = 0.0;
  for (const auto& e : E) {
    scale = std::max(scale, e.total_energy() + e.cum_viscous + e.cum_viscoelastic + std::abs(e.cum_work));
  }
  EnergyAudit audit;
  const double eps3 = ledger.eps * ledger.eps * ledger.eps;
  for (std::size_t n = 0; n < E.size(); ++n) {
    const auto& e = E[n];
    const int step = static_cast<int>(n);
    if (n > 0) {
      if (e.viscous < 0.0 || e.viscoelastic < 0.0 || e.numerical < 0.0) {
        throw AuditFailure("negative dissipation at step " + std::to_string(step), step);
      }
      const double slack = e.work - (e.total_energy() - E[n - 1].total_energy()) - e.viscous - e.viscoelastic;
      const double rel = scale > 0.0 ? slack / scale : 0.0;
      if (rel < -tolerance) {
        throw AuditFailure("energy inequality violated at step " + std::to_string(step), step);
      }
      audit.worst_slack = n == 1 ? rel : std::min(audit.worst_slack, rel);
    }
    if (e.t > 0.0) audit.ratios.push_back(e.total_energy() / (e.t * ledger.time_scale * eps3));
  }
  if (!audit.ratios.empty()) audit.terminal_ratio = audit.ratios.back();
  return audit;
}

ErrorReport compare(const std::vector<FsiState>& full, const std::vector<FsiState>& approx, const ModelParams& params) {
  if (full.size() != approx.size()) throw GridMismatch("trajectories have different lengths");
  if (full.size() < 2) throw InvalidParameter("comparison needs at least two snapshots");
  const double horizon = std::abs(full.back().t) + 1.0;
  std::vector<double> times;
  std::vector<std::vector<ChannelField>> dv;
  std::vector<ChannelField> dp;
  std::vector<PeriodicField> deta;
  for (std::size_t i = 0; i < full.size(); ++i) {
    const auto& a = full[i];
    const auto& b = approx[i];
    if (std::abs(a.t - b.t) > 1e-12 * horizon) throw GridMismatch("snapshot times do not match");
    if (a.v.size() != b.v.size() || !a.p.compatible(b.p) || !(a.eta.grid() == b.eta.grid())) {
      throw GridMismatch("snapshots live on different grids");
    }
    std::vector<ChannelField> d;
    for (std::size_t c = 0; c < a.v.size(); ++c) d.push_back(a.v[c] - b.v[c]);
    dv.push_back(std::move(d));
    dp.push_back(a.p - b.p);
    deta.push_back(a.eta - b.eta);
    times.push_back(a.t);
  }
  ErrorReport r;
  r.eps = params.eps;
  r.kappa = params.kappa;
  r.err_velocity = thin_norm_L2L2(dv, params.eps, times);
  r.err_pressure = thin_norm_L2L2(dp, params.eps, times);
  r.err_displacement = norm_LinfH2(deta);
  return r;
}

double chain_closure(const ReducedSolution& reduced, const ModelParams& params, const Forcing& f,
                     std::shared_ptr<const VerticalNodes> vnodes) {
  reduced.validate();
  std::vector<double> res, ref, times;
  const int top = vnodes->size() - 1;
  for (const auto& s : reduced.eta) {
    const PeriodicField p = limit_pressure(s.eta, params.B);
    const auto vh = horizontal_velocity(p, f, params.nu, s.t, vnodes);
    const PeriodicField flux = (1.0 / params.eps) * vertical_velocity(vh, params.eps).level(top);
    PeriodicField rate = reduced.c * apply_symbol(s.eta, [](double K1, double K2) {
      const double k2 = K1 * K1 + K2 * K2;
      return Complex(-k2 * k2 * k2, 0.0);
    });
    if (reduced.F) rate += reduced.F(s.t);
    const double d = l2_norm(flux - rate);
    const double r = l2_norm(rate);
    res.push_back(d * d);
    ref.push_back(r * r);
    times.push_back(s.t);
  }
  const double den = trapezoid(ref, times);
  const double num = trapezoid(res, times);
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

void LadderSpec::validate() const {
  if (eps.empty()) throw InvalidParameter("eps ladder is empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0 && eps[i] < 1.0)) throw InvalidParameter("eps values must lie in (0,1)");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw InvalidParameter("eps ladder must be strictly decreasing");
  }
  if (m < 4) throw InvalidParameter("at least 4 vertical nodes are required");
  if (!(dt > 0.0) || !(reduced_dt > 0.0) || !(T_end > 0.0)) throw InvalidParameter("times must be positive");
  if (samples < 2) throw InvalidParameter("at least two snapshot intervals are required");
  PeriodicGrid grid(model.dim, n);
  forcing.validate(grid);
}

namespace {

// Runs tasks on up to `jobs` threads; the first exception is rethrown after all joined.
void run_parallel(std::vector<std::function<void()>>& tasks, int jobs) {
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(tasks.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto count = static_cast<std::size_t>(std::max(1, jobs));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(count, tasks.size()); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int steps_per_sample(double T_end, int samples, double dt) {
  return std::max(1, static_cast<int>(std::ceil(T_end / (samples * dt) - 1e-9)));
}

// Differences of two FSI trajectories after mapping `fine` onto the vertical nodes of `base`.
ErrorReport self_difference(const std::vector<FsiState>& base, const std::vector<FsiState>& fine,
                            const ModelParams& params) {
  const auto& vn = base.front().p.vnodes();
  const auto vptr = base.front().p.vnodes_ptr();
  const auto& fvn = fine.front().p.vnodes();
  if (fvn == vn) return compare(base, fine, params);
  const Eigen::MatrixXd I = fvn.interpolation_to(vn.nodes());
  auto remap = [&](const ChannelField& f) {
    ChannelField out(f.grid(), vptr);
    for (int j = 0; j < vn.size(); ++j) {
      for (std::size_t h = 0; h < f.grid().size(); ++h) {
        double s = 0.0;
        for (int l = 0; l < fvn.size(); ++l) s += I(j, l) * f.at(l, h);
        out.at(j, h) = s;
      }
    }
    return out;
  };
  std::vector<FsiState> mapped;
  for (const auto& s : fine) {
    FsiState t;
    for (const auto& c : s.v) t.v.push_back(remap(c));
    t.p = remap(s.p);
    t.eta = s.eta;
    t.eta_t = s.eta_t;
    t.t = s.t;
    mapped.push_back(std::move(t));
  }
  return compare(base, mapped, params);
}

double safe_ratio(double model, double self) { return self > 0.0 ? model / self : INFINITY; }

}  // namespace

RateStudy run_rate_study(const LadderSpec& spec, int jobs, const ProgressFn& progress) {
  spec.validate();
  std::mutex log_mutex;
  auto log = [&](const std::string& msg) {
    if (!progress) return;
    std::lock_guard lock(log_mutex);
    progress(msg);
  };

  const PeriodicGrid grid(spec.model.dim, spec.n);
  const auto vn = std::make_shared<const VerticalNodes>(spec.m);
  const int kf = steps_per_sample(spec.T_end, spec.samples, spec.dt);
  const int kr = steps_per_sample(spec.T_end, spec.samples, spec.reduced_dt);
  const double dt_full = spec.T_end / (static_cast<double>(spec.samples) * kf);
  const double dt_red = spec.T_end / (static_cast<double>(spec.samples) * kr);

  ModelParams base = spec.model;
  base.eps = spec.eps.front();
  log("reduced model: dt=" + std::to_string(dt_red));
  const ReducedSolution reduced = solve_reduced(base, spec.forcing, grid, spec.T_end, dt_red, kr);

  auto params_for = [&](double eps, double dt, std::shared_ptr<const VerticalNodes> nodes) {
    FsiParams p;
    p.model = spec.model;
    p.model.eps = eps;
    p.grid = grid;
    p.vnodes = std::move(nodes);
    p.dt = dt;
    p.forcing = spec.forcing;
    return p;
  };

  RateStudy study;
  const std::size_t L = spec.eps.size();
  study.reports.resize(L);
  study.audits.resize(L);
  std::vector<std::vector<FsiState>> terminal(L);
  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i < L; ++i) {
    tasks.emplace_back([&, i] {
      const FsiParams p = params_for(spec.eps[i], dt_full, vn);
      log("fsi eps=" + std::to_string(spec.eps[i]) + " steps=" + std::to_string(long(kf) * spec.samples));
      FsiRun run = run_fsi(p, spec.T_end, kf);
      const auto approx = assemble_approx(reduced, p.model, spec.forcing, vn);
      ErrorReport r = compare(run.snapshots, approx, p.model);
      study.audits[i] = energy_audit(run.ledger);
      r.energy_ratio = study.audits[i].terminal_ratio;
      r.dt = dt_full;
      r.steps = static_cast<long>(run.ledger.entries.size()) - 1;
      study.reports[i] = r;
      if (i + 1 == L) terminal[i] = std::move(run.snapshots);
      log("fsi eps=" + std::to_string(spec.eps[i]) + " done");
    });
  }
  std::vector<FsiState> fine_dt, fine_m;
  if (spec.refinement) {
    tasks.emplace_back([&] {
      fine_dt = run_fsi(params_for(spec.eps.back(), dt_full / 2, vn), spec.T_end, 2 * kf).snapshots;
      log("refinement dt/2 done");
    });
    tasks.emplace_back([&] {
      const auto vfine = std::make_shared<const VerticalNodes>(spec.m + 8);
      fine_m = run_fsi(params_for(spec.eps.back(), dt_full, vfine), spec.T_end, kf).snapshots;
      log("refinement m+8 done");
    });
  }
  run_parallel(tasks, jobs);

  if (spec.refinement) {
    ModelParams small = spec.model;
    small.eps = spec.eps.back();
    const ErrorReport& model = study.reports.back();
    const ErrorReport a = self_difference(terminal.back(), fine_dt, small);
    const ErrorReport b = self_difference(terminal.back(), fine_m, small);
    auto& rc = study.refinement;
    rc.ran = true;
    rc.velocity_dt = safe_ratio(model.err_velocity, a.err_velocity);
    rc.pressure_dt = safe_ratio(model.err_pressure, a.err_pressure);
    rc.displacement_dt = safe_ratio(model.err_displacement, a.err_displacement);
    rc.velocity_m = safe_ratio(model.err_velocity, b.err_velocity);
    rc.pressure_m = safe_ratio(model.err_pressure, b.err_pressure);
    rc.displacement_m = safe_ratio(model.err_displacement, b.err_displacement);
    rc.pass = std::min({rc.velocity_dt, rc.pressure_dt, rc.displacement_dt, rc.velocity_m, rc.pressure_m,
                        rc.displacement_m}) >= 10.0;
  }

  study.closure = chain_closure(reduced, base, spec.forcing, vn);
  if (L >= 3) {
    study.velocity = fit_rate(study.reports, ErrorNorm::velocity);
    study.pressure = fit_rate(study.reports, ErrorNorm::pressure);
    study.displacement = fit_rate(study.reports, ErrorNorm::displacement);
    const auto& t = spec.thresholds;
    study.rates_pass = study.velocity.slope >= t.velocity && study.pressure.slope >= t.pressure &&
                       study.displacement.slope >= t.displacement && study.velocity.r2 >= t.r2 &&
                       study.pressure.r2 >= t.r2 && study.displacement.r2 >= t.r2;
  }
  double lo = INFINITY, hi = 0.0;
  for (const auto& r : study.reports) {
    lo = std::min(lo, r.energy_ratio);
    hi = std::max(hi, r.energy_ratio);
  }
  study.energy_spread = lo > 0.0 ? hi / lo : INFINITY;
  study.energy_pass = study.energy_spread <= spec.thresholds.energy_spread;
  return study;
}

void to_json(nlohmann::json& j, const ErrorReport& r) {
  j = {{"eps", r.eps},
       {"kappa", r.kappa},
       {"err_velocity", r.err_velocity},
       {"err_pressure", r.err_pressure},
       {"err_displacement", r.err_displacement},
       {"energy_ratio", r.energy_ratio},
       {"dt", r.dt},
       {"steps", r.steps}};
}

void to_json(nlohmann::json& j, const RateFit& f) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& [e, err] : f.points) pts.push_back({e, err});
  j = {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"points", pts}};
}

void to_json(nlohmann::json& j, const RateStudy& s) {
  nlohmann::json audits = nlohmann::json::array();
  for (std::size_t i = 0; i < s.audits.size(); ++i) {
    audits.push_back({{"eps", s.reports[i].eps},
                      {"worst_slack", s.audits[i].worst_slack},
                      {"terminal_ratio", s.audits[i].terminal_ratio}});
  }
  const auto& rc = s.refinement;
  j = {{"reports", s.reports},
       {"rates",
        {{"velocity", s.velocity}, {"pressure", s.pressure}, {"displacement", s.displacement}}},
       {"rates_pass", s.rates_pass},
       {"energy", {{"audits", audits}, {"spread", s.energy_spread}, {"pass", s.energy_pass}}},
       {"closure", s.closure},
       {"refinement",
        {{"ran", rc.ran},
         {"pass", rc.pass},
         {"dt", {{"velocity", rc.velocity_dt}, {"pressure", rc.pressure_dt}, {"displacement", rc.displacement_dt}}},
         {"m", {{"velocity", rc.velocity_m}, {"pressure", rc.pressure_m}, {"displacement", rc.displacement_m}}}}}};
}

void write_reports_csv(std::ostream& os, const std::vector<ErrorReport>& reports) {
  os << "eps,kappa,err_velocity,err_pressure,err_displacement,energy_ratio,dt,steps\n";
  os << std::setprecision(17);
  for (const auto& r : reports) {
    os << r.eps << ',' << r.kappa.str() << ',' << r.err_velocity << ',' << r.err_pressure << ','
       << r.err_displacement << ',' << r.energy_ratio << ',' << r.dt << ',' << r.steps << '\n';
  }
}

}  // namespace lubelastic
