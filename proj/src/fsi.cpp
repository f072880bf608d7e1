#include "lubelastic/fsi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lubelastic/errors.hpp"

namespace lubelastic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const Complex kI(0.0, 1.0);

struct ModeCoefficients {
  double K[2];
  double K2;
};

ModeCoefficients wave(const Wavevector& k) {
  ModeCoefficients c{};
  c.K[0] = kTwoPi * k[0];
  c.K[1] = kTwoPi * k[1];
  c.K2 = c.K[0] * c.K[0] + c.K[1] * c.K[1];
  return c;
}

// Full nodal profile (m values) of velocity component c from the unknown vector.
Eigen::VectorXcd profile(const ModeLayout& L, const Eigen::VectorXcd& x, int c) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(L.m);
  if (c < L.dim) {
    v.segment(1, L.m - 2) = x.segment(L.horizontal(c), L.m - 2);
  } else {
    v.segment(1, L.m - 1) = x.segment(L.vertical(), L.m - 1);
  }
  return v;
}

double quad(const Eigen::MatrixXd& A, const Eigen::VectorXcd& v) { return (v.adjoint() * A * v)(0, 0).real(); }

bool is_nyquist(const PeriodicGrid& g, const Wavevector& k) {
  return k[0] == -g.n / 2 || (g.dim == 2 && k[1] == -g.n / 2);
}

}  // namespace

void FsiParams::validate() const {
  model.validate(true);
  if (model.v_D != 0.0) throw InvalidParameter("bottom-wall drift is not part of the coupled problem");
  if (grid.dim != model.dim) throw GridMismatch("grid dimension differs from the model dimension");
  if (!vnodes) throw InvalidParameter("vertical nodes missing");
  if (vnodes->size() < 4) throw InvalidParameter("at least 4 vertical nodes are required");
  if (!(dt > 0.0)) throw InvalidParameter("time step must be positive");
  forcing.validate(grid);
}

FsiState FsiState::zero(const FsiParams& params) {
  FsiState s;
  for (int c = 0; c <= params.grid.dim; ++c) s.v.emplace_back(params.grid, params.vnodes);
  s.p = ChannelField(params.grid, params.vnodes);
  s.eta = PeriodicField(params.grid);
  s.eta_t = PeriodicField(params.grid);
  return s;
}

VerticalOperators::VerticalOperators(const VerticalNodes& vn) {
  const int m = vn.size();
  const GaussRule g = gauss_legendre(m + 1, -1.0, 0.0);
  const Eigen::MatrixXd L = vn.interpolation_to(g.points);
  const Eigen::MatrixXd Ld = L * vn.differentiation();
  const std::vector<double> interior(vn.nodes().begin() + 1, vn.nodes().end() - 1);
  const Eigen::MatrixXd P = lagrange_interpolation(interior, g.points);
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(g.weights.data(), m + 1);
  const auto W = w.asDiagonal();
  mass = L.transpose() * W * L;
  stiffness = Ld.transpose() * W * Ld;
  coupling = L.transpose() * W * P;
  dcoupling = Ld.transpose() * W * P;
  pmass = P.transpose() * W * P;
  pressure_extension = lagrange_interpolation(interior, vn.nodes());
}

ModeOperator::ModeOperator(Eigen::MatrixXcd matrix, ModeLayout layout)
    : matrix_(std::move(matrix)), layout_(layout) {
  const auto n = matrix_.rows();
  row_scale_ = Eigen::VectorXd::Ones(n);
  col_scale_ = Eigen::VectorXd::Ones(n);
  Eigen::MatrixXcd B = matrix_;
  for (int it = 0; it < 10; ++it) {
    const Eigen::VectorXd r = B.cwiseAbs().rowwise().maxCoeff();
    const Eigen::VectorXd c = B.cwiseAbs().colwise().maxCoeff().transpose();
    if ((r.array() <= 0.0).any() || (c.array() <= 0.0).any()) {
      throw AssemblyError("mode operator has an empty row or column");
    }
    const Eigen::VectorXd dr = r.cwiseSqrt().cwiseInverse();
    const Eigen::VectorXd dc = c.cwiseSqrt().cwiseInverse();
    B = dr.asDiagonal() * B * dc.asDiagonal();
    row_scale_ = row_scale_.cwiseProduct(dr);
    col_scale_ = col_scale_.cwiseProduct(dc);
  }
  lu_.compute(B);
  const double rc = lu_.rcond();
  if (!std::isfinite(rc) || rc < 1e-15) {
    throw AssemblyError("singular mode operator (reciprocal condition " + std::to_string(rc) + ")");
  }
}

Eigen::VectorXcd ModeOperator::solve(const Eigen::VectorXcd& rhs) const {
  Eigen::VectorXcd x = col_scale_.asDiagonal() * lu_.solve(row_scale_.asDiagonal() * rhs);
  const Eigen::VectorXcd r = rhs - matrix_ * x;
  x += col_scale_.asDiagonal() * lu_.solve(row_scale_.asDiagonal() * r);
  return x;
}

namespace {

// Spatial part of the operator (dt enters through the inertia and bending-velocity terms).
Eigen::MatrixXcd assemble(const FsiParams& params, const VerticalOperators& V, const Wavevector& k, double inertia,
                          double bending_dt) {
  const auto& mp = params.model;
  const int m = params.vnodes->size();
  const ModeLayout L{m, params.grid.dim};
  const auto w = wave(k);
  const double eps = mp.eps;
  const double T = mp.time_scale();
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(L.size(), L.size());

  const Eigen::MatrixXd vel = inertia * eps * mp.rho_f / T * V.mass +
                              eps * mp.nu * (V.stiffness / (eps * eps) + w.K2 * V.mass);
  for (int a = 0; a < L.dim; ++a) {
    const int o = L.horizontal(a);
    A.block(o, o, m - 2, m - 2) = vel.block(1, 1, m - 2, m - 2).cast<Complex>();
    const Eigen::MatrixXcd G = V.coupling.block(1, 0, m - 2, m - 2).cast<Complex>();
    A.block(o, L.pressure(), m - 2, m - 2) = kI * w.K[a] * eps * G;
    A.block(L.pressure(), o, m - 2, m - 2) = -kI * w.K[a] * eps * G.transpose();
  }
  const int o3 = L.vertical();
  A.block(o3, o3, m - 1, m - 1) = vel.block(1, 1, m - 1, m - 1).cast<Complex>();
  const Eigen::MatrixXcd H = V.dcoupling.block(1, 0, m - 1, m - 2).cast<Complex>();
  A.block(o3, L.pressure(), m - 1, m - 2) = -H;
  A.block(L.pressure(), o3, m - 2, m - 1) = -H.transpose();

  const double K4 = w.K2 * w.K2;
  A(L.top(), L.top()) += inertia * mp.plate_density() / T + mp.rigidity() * K4 * bending_dt * T + mp.theta * K4;
  return A;
}

}  // namespace

ModeOperator assemble_mode_system(const FsiParams& params, const Wavevector& k, double dt) {
  if (!(dt > 0.0)) throw InvalidParameter("time step must be positive");
  params.grid.index_of(k);
  const VerticalOperators V(*params.vnodes);
  return ModeOperator(assemble(params, V, k, 1.0 / dt, dt), ModeLayout{params.vnodes->size(), params.grid.dim});
}

Eigen::MatrixXcd mass_operator(const FsiParams& params, const Wavevector& k) {
  const auto& mp = params.model;
  const VerticalOperators V(*params.vnodes);
  const int m = params.vnodes->size();
  const ModeLayout L{m, params.grid.dim};
  (void)k;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(L.size(), L.size());
  const Eigen::MatrixXd M = mp.eps * mp.rho_f / mp.time_scale() * V.mass;
  for (int a = 0; a < L.dim; ++a) {
    A.block(L.horizontal(a), L.horizontal(a), m - 2, m - 2) = M.block(1, 1, m - 2, m - 2).cast<Complex>();
  }
  A.block(L.vertical(), L.vertical(), m - 1, m - 1) = M.block(1, 1, m - 1, m - 1).cast<Complex>();
  A(L.top(), L.top()) += mp.plate_density() / mp.time_scale();
  return A;
}

Eigen::MatrixXd viscous_block(const FsiParams& params, const Wavevector& k) {
  const auto& mp = params.model;
  const VerticalOperators V(*params.vnodes);
  const int m = params.vnodes->size();
  const ModeLayout L{m, params.grid.dim};
  const auto w = wave(k);
  const double eps = mp.eps;
  const Eigen::MatrixXd vel = eps * mp.nu * (V.stiffness / (eps * eps) + w.K2 * V.mass);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(L.velocity_size(), L.velocity_size());
  for (int a = 0; a < L.dim; ++a) {
    A.block(L.horizontal(a), L.horizontal(a), m - 2, m - 2) = vel.block(1, 1, m - 2, m - 2);
  }
  A.block(L.vertical(), L.vertical(), m - 1, m - 1) = vel.block(1, 1, m - 1, m - 1);
  return A;
}

FsiSolver::FsiSolver(FsiParams params)
    : params_(std::move(params)), vops_(*params_.vnodes), layout_{params_.vnodes->size(), params_.grid.dim} {
  params_.validate();
  ledger_.eps = params_.model.eps;
  ledger_.time_scale = params_.model.time_scale();
  ledger_.kappa = params_.model.kappa;
  ledger_.entries.push_back(energies());
}

FsiSolver::FsiSolver(FsiParams params, const FsiState& initial)
    : params_(std::move(params)), vops_(*params_.vnodes), layout_{params_.vnodes->size(), params_.grid.dim} {
  params_.validate();
  const auto& g = params_.grid;
  const int m = layout_.m;
  if (static_cast<int>(initial.v.size()) != g.dim + 1) throw GridMismatch("velocity component count mismatch");
  for (const auto& c : initial.v) {
    if (!(c.grid() == g) || c.levels() != m) throw GridMismatch("velocity field does not match the grid");
  }
  if (!(initial.p.grid() == g) || initial.p.levels() != m || !(initial.eta.grid() == g)) {
    throw GridMismatch("state does not match the grid");
  }
  t0_ = initial.t;
  t_ = initial.t;
  std::vector<std::vector<Spectrum>> vs(g.dim + 1);
  for (int c = 0; c <= g.dim; ++c) {
    for (int j = 0; j < m; ++j) vs[c].push_back(forward(initial.v[c].level(j)));
  }
  std::vector<Spectrum> ps;
  for (int j = 1; j < m - 1; ++j) ps.push_back(forward(initial.p.level(j)));
  const Spectrum eh = forward(initial.eta);
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const Wavevector k = g.wavevector(idx);
    if (is_nyquist(g, k)) continue;
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(layout_.size());
    for (int a = 0; a < g.dim; ++a) {
      for (int j = 1; j < m - 1; ++j) x(layout_.horizontal(a) + j - 1) = vs[a][j][idx];
    }
    for (int j = 1; j < m; ++j) x(layout_.vertical() + j - 1) = vs[g.dim][j][idx];
    for (int j = 0; j < m - 2; ++j) x(layout_.pressure() + j) = ps[j][idx];
    if (x.squaredNorm() == 0.0 && eh[idx] == Complex{}) continue;
    modes_[idx] = Mode{k, std::move(x), eh[idx]};
  }
  ledger_.eps = params_.model.eps;
  ledger_.time_scale = params_.model.time_scale();
  ledger_.kappa = params_.model.kappa;
  ledger_.entries.push_back(energies());
}

FsiSolver::Mode& FsiSolver::mode(const Wavevector& k) {
  const std::size_t idx = params_.grid.index_of(k);
  auto it = modes_.find(idx);
  if (it == modes_.end()) {
    it = modes_.emplace(idx, Mode{k, Eigen::VectorXcd::Zero(layout_.size()), Complex{}}).first;
  }
  return it->second;
}

const ModeOperator& FsiSolver::op(const Wavevector& k) {
  const std::size_t idx = params_.grid.index_of(k);
  auto it = ops_.find(idx);
  if (it == ops_.end()) {
    const double dt = params_.dt;
    it = ops_.emplace(idx, ModeOperator(assemble(params_, vops_, k, 1.0 / dt, dt), layout_)).first;
  }
  return it->second;
}

Eigen::VectorXcd FsiSolver::forcing_load(const Wavevector& k, double t) const {
  // ε ∫ f ℓ_i for every velocity test function
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(layout_.size());
  const int m = layout_.m;
  const double eps = params_.model.eps;
  for (int c = 0; c <= layout_.dim; ++c) {
    const auto f = params_.forcing.coefficient(c, k, *params_.vnodes, t);
    const Eigen::VectorXcd fv = Eigen::Map<const Eigen::VectorXcd>(f.data(), m);
    if (fv.squaredNorm() == 0.0) continue;
    const Eigen::VectorXcd load = eps * vops_.mass.cast<Complex>() * fv;
    if (c < layout_.dim) {
      b.segment(layout_.horizontal(c), m - 2) += load.segment(1, m - 2);
    } else {
      b.segment(layout_.vertical(), m - 1) += load.segment(1, m - 1);
    }
  }
  return b;
}

void FsiSolver::step() {
  const auto& mp = params_.model;
  const double dt = params_.dt;
  const double T = mp.time_scale();
  const double t_new = t0_ + static_cast<double>(step_ + 1) * dt;
  const double eps = mp.eps;
  const int m = layout_.m;

  for (const auto& k : params_.forcing.support()) mode(k);

  EnergyEntry e;
  const Eigen::MatrixXcd Mc = vops_.mass.cast<Complex>();
  for (auto& [idx, md] : modes_) {
    const auto w = wave(md.k);
    const double K4 = w.K2 * w.K2;
    const Eigen::VectorXcd x_old = md.x;
    const Complex eta_old = md.eta;
    const Complex w_old = x_old(layout_.top());

    const Eigen::VectorXcd load = forcing_load(md.k, t_new);
    Eigen::VectorXcd b = load;
    const double cin = eps * mp.rho_f / (T * dt);
    for (int c = 0; c <= layout_.dim; ++c) {
      const Eigen::VectorXcd mv = cin * (Mc * profile(layout_, x_old, c));
      if (c < layout_.dim) {
        b.segment(layout_.horizontal(c), m - 2) += mv.segment(1, m - 2);
      } else {
        b.segment(layout_.vertical(), m - 1) += mv.segment(1, m - 1);
      }
    }
    b(layout_.top()) += mp.plate_density() / (T * dt) * w_old - mp.rigidity() * K4 * eta_old;

    md.x = op(md.k).solve(b);
    const Complex w_new = md.x(layout_.top());
    md.eta = eta_old + dt * T * w_new;

    // increments of the discrete energy identity
    double visc = 0.0;
    double work = 0.0;
    double numerical = 0.0;
    const Eigen::MatrixXd Sv = vops_.stiffness / (eps * eps) + w.K2 * vops_.mass;
    for (int c = 0; c <= layout_.dim; ++c) {
      const Eigen::VectorXcd v = profile(layout_, md.x, c);
      const Eigen::VectorXcd dv = v - profile(layout_, x_old, c);
      visc += quad(Sv, v);
      numerical += quad(vops_.mass, dv);
      const auto f = params_.forcing.coefficient(c, md.k, *params_.vnodes, t_new);
      const Eigen::VectorXcd fv = Eigen::Map<const Eigen::VectorXcd>(f.data(), m);
      work += (v.adjoint() * Mc * fv)(0, 0).real();
    }
    e.viscous += dt * T * eps * mp.nu * visc;
    e.viscoelastic += dt * T * mp.theta * K4 * std::norm(w_new);
    e.work += dt * T * eps * work;
    e.numerical += 0.5 * eps * mp.rho_f * numerical + 0.5 * mp.plate_density() * std::norm(w_new - w_old) +
                   0.5 * mp.rigidity() * K4 * std::norm(md.eta - eta_old);
  }
  t_ = t_new;
  ++step_;

  const EnergyEntry& prev = ledger_.entries.back();
  EnergyEntry now = energies();
  now.viscous = e.viscous;
  now.viscoelastic = e.viscoelastic;
  now.work = e.work;
  now.numerical = e.numerical;
  now.cum_viscous = prev.cum_viscous + e.viscous;
  now.cum_viscoelastic = prev.cum_viscoelastic + e.viscoelastic;
  now.cum_work = prev.cum_work + e.work;
  now.cum_numerical = prev.cum_numerical + e.numerical;
  ledger_.entries.push_back(now);
}

EnergyEntry FsiSolver::energies() const {
  const auto& mp = params_.model;
  EnergyEntry e;
  e.step = step_;
  e.t = t_;
  for (const auto& [idx, md] : modes_) {
    const auto w = wave(md.k);
    for (int c = 0; c <= layout_.dim; ++c) e.kinetic_fluid += quad(vops_.mass, profile(layout_, md.x, c));
    e.kinetic_plate += std::norm(md.x(layout_.top()));
    e.bending += w.K2 * w.K2 * std::norm(md.eta);
  }
  e.kinetic_fluid *= 0.5 * mp.eps * mp.rho_f;
  e.kinetic_plate *= 0.5 * mp.plate_density();
  e.bending *= 0.5 * mp.rigidity();
  return e;
}

FsiState FsiSolver::state() const {
  const auto& g = params_.grid;
  const int m = layout_.m;
  const double T = params_.model.time_scale();
  FsiState s = FsiState::zero(params_);
  s.t = t_;
  std::vector<std::vector<Spectrum>> vs(g.dim + 1, std::vector<Spectrum>(m, Spectrum(g.size())));
  std::vector<Spectrum> ps(m, Spectrum(g.size()));
  Spectrum eh(g.size());
  Spectrum eth(g.size());
  for (const auto& [idx, md] : modes_) {
    for (int c = 0; c <= g.dim; ++c) {
      const Eigen::VectorXcd v = profile(layout_, md.x, c);
      for (int j = 0; j < m; ++j) vs[c][j][idx] = v(j);
    }
    const Eigen::VectorXcd p = vops_.pressure_extension.cast<Complex>() * md.x.segment(layout_.pressure(), m - 2);
    for (int j = 0; j < m; ++j) ps[j][idx] = p(j);
    eh[idx] = md.eta;
    eth[idx] = T * md.x(layout_.top());
  }
  for (int c = 0; c <= g.dim; ++c) {
    for (int j = 0; j < m; ++j) s.v[c].set_level(j, inverse(g, vs[c][j]));
  }
  for (int j = 0; j < m; ++j) s.p.set_level(j, inverse(g, ps[j]));
  s.eta = inverse(g, eh);
  s.eta_t = inverse(g, eth);
  return s;
}

FsiDiagnostics FsiSolver::diagnostics() const {
  FsiDiagnostics d;
  const double eps = params_.model.eps;
  const int m = layout_.m;
  const Eigen::LDLT<Eigen::MatrixXd> pm(vops_.pmass);
  double div2 = 0.0;
  double grad2 = 0.0;
  for (const auto& [idx, md] : modes_) {
    const auto w = wave(md.k);
    // moments ∫ div_ε v π_j
    Eigen::VectorXcd r = Eigen::VectorXcd::Zero(m - 2);
    for (int a = 0; a < layout_.dim; ++a) {
      r += kI * w.K[a] * (vops_.coupling.transpose().cast<Complex>() * profile(layout_, md.x, a));
    }
    r += vops_.dcoupling.transpose().cast<Complex>() * profile(layout_, md.x, layout_.dim) / eps;
    const Eigen::VectorXd re = r.real();
    const Eigen::VectorXd im = r.imag();
    div2 += re.dot(pm.solve(re)) + im.dot(pm.solve(im));
    const Eigen::MatrixXd Sv = vops_.stiffness / (eps * eps) + w.K2 * vops_.mass;
    for (int c = 0; c <= layout_.dim; ++c) grad2 += quad(Sv, profile(layout_, md.x, c));
    if (md.k[0] == 0 && md.k[1] == 0) d.eta_mean = std::abs(md.eta);
  }
  d.divergence_ratio = grad2 > 0.0 ? std::sqrt(std::max(div2, 0.0) / grad2) : 0.0;

  const FsiState s = state();
  const auto& g = params_.grid;
  const double T = params_.model.time_scale();
  for (std::size_t h = 0; h < g.size(); ++h) {
    for (int a = 0; a < g.dim; ++a) d.top_horizontal = std::max(d.top_horizontal, std::abs(s.v[a].at(m - 1, h)));
    d.kinematic = std::max(d.kinematic, std::abs(s.v[g.dim].at(m - 1, h) - s.eta_t[h] / T));
  }
  return d;
}

std::vector<Wavevector> FsiSolver::active_modes() const {
  std::vector<Wavevector> ks;
  for (const auto& [idx, md] : modes_) {
    if (md.x.squaredNorm() > 0.0 || md.eta != Complex{}) ks.push_back(md.k);
  }
  std::sort(ks.begin(), ks.end());
  return ks;
}

FsiState step_fsi(const FsiParams& params, const FsiState& state) {
  FsiSolver solver(params, state);
  solver.step();
  return solver.state();
}

namespace {

void merge_worst(FsiDiagnostics& w, const FsiDiagnostics& d) {
  w.divergence_ratio = std::max(w.divergence_ratio, d.divergence_ratio);
  w.top_horizontal = std::max(w.top_horizontal, d.top_horizontal);
  w.kinematic = std::max(w.kinematic, d.kinematic);
  w.eta_mean = std::max(w.eta_mean, d.eta_mean);
}

}  // namespace

FsiRun run_fsi(const FsiParams& params, double T_end, int output_every) {
  if (!(T_end > 0.0)) throw InvalidParameter("time horizon must be positive");
  if (output_every < 1) throw InvalidParameter("output_every must be at least 1");
  FsiParams p = params;
  const long steps = static_cast<long>(std::ceil(T_end / params.dt - 1e-9));
  p.dt = T_end / static_cast<double>(steps);

  FsiRun run;
  run.regime = validate_theorem_regime(p.model.kappa);
  FsiSolver solver(p);
  run.snapshots.push_back(solver.state());
  for (long n = 1; n <= steps; ++n) {
    solver.step();
    const bool snapshot = n % output_every == 0 || n == steps;
    if (snapshot) {
      merge_worst(run.worst, solver.diagnostics());
      run.snapshots.push_back(solver.state());
    }
    const auto& e = solver.ledger().entries.back();
    for (double v : {e.kinetic_fluid, e.kinetic_plate, e.bending, e.viscous, e.viscoelastic, e.numerical}) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Breakdown("energy ledger lost positivity at step " + std::to_string(n));
      }
    }
  }
  run.ledger = solver.ledger();
  return run;
}

}  // namespace lubelastic
