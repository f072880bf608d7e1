#include "lubelastic/reconstruction.hpp"

#include <cmath>

#include "lubelastic/errors.hpp"

namespace lubelastic {

void ReducedSolution::validate() const {
  if (eta.empty()) throw InvalidParameter("reduced solution has no snapshots");
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (i > 0 && !(eta[i].t > eta[i - 1].t)) throw InvalidParameter("snapshot times must increase");
    const double scale = std::max(1.0, std::max(std::abs(eta[i].eta.max()), std::abs(eta[i].eta.min())));
    if (std::abs(mean_value(eta[i].eta)) > 1e-12 * scale) throw InvalidParameter("snapshot has nonzero mean");
  }
}

PeriodicField limit_pressure(const PeriodicField& eta, double B) {
  return apply_symbol(eta, [B](double K1, double K2) {
    const double K2sum = K1 * K1 + K2 * K2;
    return Complex(B * K2sum * K2sum, 0.0);
  });
}

namespace {

// F with -ν F'' = g, F(-1) = F(0) = 0, per horizontal point.
ChannelField dirichlet_profile(const ChannelField& g, double nu) {
  const ChannelField Q = cumulative_vertical_integral(cumulative_vertical_integral(g));
  const auto& y = g.vnodes().nodes();
  const int top = g.levels() - 1;
  ChannelField F(g.grid(), g.vnodes_ptr());
  for (int j = 0; j < g.levels(); ++j) {
    for (std::size_t h = 0; h < g.grid().size(); ++h) {
      F.at(j, h) = ((y[j] + 1.0) * Q.at(top, h) - Q.at(j, h)) / nu;
    }
  }
  return F;
}

}  // namespace

std::vector<ChannelField> horizontal_velocity(const PeriodicField& p, const Forcing& f, double nu, double t,
                                              std::shared_ptr<const VerticalNodes> vnodes) {
  const auto& grid = p.grid();
  const auto force = f.sample(grid, vnodes, t);
  const auto& y = vnodes->nodes();
  std::vector<ChannelField> v;
  for (int a = 0; a < grid.dim; ++a) {
    ChannelField va = dirichlet_profile(force[a], nu);
    const PeriodicField dp = spectral_derivative(p, 1, a);
    for (int j = 0; j < vnodes->size(); ++j) {
      const double w = y[j] * (y[j] + 1.0) / (2.0 * nu);
      for (std::size_t h = 0; h < grid.size(); ++h) va.at(j, h) += w * dp[h];
    }
    v.push_back(std::move(va));
  }
  return v;
}

ChannelField vertical_velocity(const std::vector<ChannelField>& vh, double eps) {
  if (vh.empty()) throw InvalidParameter("no horizontal velocity components");
  ChannelField div = horizontal_derivative(vh[0], 1, 0);
  for (std::size_t a = 1; a < vh.size(); ++a) {
    if (!vh[a].compatible(vh[0])) throw GridMismatch("velocity components live on different grids");
    div += horizontal_derivative(vh[a], 1, static_cast<int>(a));
  }
  return -eps * cumulative_vertical_integral(div);
}

namespace {

PeriodicField reduced_source(const Forcing& f, double nu, const PeriodicGrid& grid, double t,
                             const std::shared_ptr<const VerticalNodes>& vn) {
  const auto force = f.sample(grid, vn, t);
  PeriodicField F(grid);
  for (int a = 0; a < grid.dim; ++a) {
    F -= spectral_derivative(vertical_integral(dirichlet_profile(force[a], nu)), 1, a);
  }
  return F;
}

}  // namespace

PeriodicField forcing_F(const Forcing& f, double nu, const PeriodicGrid& grid, double t, int m) {
  return reduced_source(f, nu, grid, t, std::make_shared<const VerticalNodes>(m));
}

ReducedSolution solve_reduced(const ModelParams& params, const Forcing& f, const PeriodicGrid& grid, double T_end,
                              double dt, int output_every) {
  f.validate(grid);
  ReducedSolution r;
  r.c = reduced_coefficient_e0(params.B, params.nu);
  if (!f.empty()) {
    const double nu = params.nu;
    const auto vn = std::make_shared<const VerticalNodes>(16);
    r.F = [f, nu, grid, vn](double t) { return reduced_source(f, nu, grid, t, vn); };
  }
  r.eta = solve_linear_sixth(r.c, r.F, PeriodicField(grid), T_end, dt, output_every);
  return r;
}

PeriodicField time_derivative(const std::vector<FilmState>& traj, std::size_t i) {
  const std::size_t n = traj.size();
  if (n < 2) throw InvalidParameter("time derivative needs at least two snapshots");
  if (i >= n) throw InvalidParameter("snapshot index out of range");
  if (n == 2) return (1.0 / (traj[1].t - traj[0].t)) * (traj[1].eta - traj[0].eta);
  // derivative at t_i of the quadratic through three consecutive snapshots
  const std::size_t a = i == 0 ? 0 : (i == n - 1 ? n - 3 : i - 1);
  const double t0 = traj[a].t, t1 = traj[a + 1].t, t2 = traj[a + 2].t;
  const double t = traj[i].t;
  const double w0 = ((t - t1) + (t - t2)) / ((t0 - t1) * (t0 - t2));
  const double w1 = ((t - t0) + (t - t2)) / ((t1 - t0) * (t1 - t2));
  const double w2 = ((t - t0) + (t - t1)) / ((t2 - t0) * (t2 - t1));
  return w0 * traj[a].eta + w1 * traj[a + 1].eta + w2 * traj[a + 2].eta;
}

std::vector<FsiState> assemble_approx(const ReducedSolution& reduced, const ModelParams& params, const Forcing& f,
                                      std::shared_ptr<const VerticalNodes> vnodes) {
  params.validate(true);
  reduced.validate();
  const double eps = params.eps;
  const double e2 = eps * eps;
  const double ek = pow_eps(eps, params.kappa);
  std::vector<FsiState> out;
  for (std::size_t i = 0; i < reduced.eta.size(); ++i) {
    const auto& snap = reduced.eta[i];
    const PeriodicField p = limit_pressure(snap.eta, params.B);
    auto vh = horizontal_velocity(p, f, params.nu, snap.t, vnodes);
    const ChannelField v3 = vertical_velocity(vh, eps);
    FsiState s;
    for (auto& c : vh) s.v.push_back(e2 * std::move(c));
    s.v.push_back(e2 * v3);
    s.p = extend_vertically(p, vnodes);
    s.eta = ek * snap.eta;
    s.eta_t = reduced.eta.size() > 1 ? ek * time_derivative(reduced.eta, i) : PeriodicField(snap.eta.grid());
    s.t = snap.t;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace lubelastic
