#include "lubelastic/thinfilm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lubelastic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool uses_mobility(const ThinFilmModel& m) { return !m.linearized; }

// ∂_axis of a field given by its spectrum, with the odd-order Nyquist convention.
Spectrum derivative_spectrum(const PeriodicGrid& g, const Spectrum& c, int axis) {
  Spectrum out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const int k = g.wavevector(i)[axis];
    out[i] = k == -g.n / 2 ? Complex{} : Complex(0.0, kTwoPi * k) * c[i];
  }
  return out;
}

double squared_wavenumber(const PeriodicGrid& g, std::size_t i) {
  const Wavevector k = g.wavevector(i);
  return kTwoPi * kTwoPi * (static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1]);
}

// ∇·(m(η) ∇q) for the spectrum of q, the product dealiased.
Spectrum mobility_divergence(const ThinFilmModel& model, const PeriodicField& eta, const Spectrum& q) {
  const auto& g = eta.grid();
  Spectrum div(q.size(), Complex{});
  const double scale = model.mobility_scale;
  for (int axis = 0; axis < g.dim; ++axis) {
    Spectrum grad = derivative_spectrum(g, q, axis);
    if (uses_mobility(model)) {
      grad = forward(dealiased_product(eta, [scale](double e) { return scale * e * e * e; }, inverse(g, grad)));
    }
    const Spectrum d = derivative_spectrum(g, grad, axis);
    for (std::size_t i = 0; i < div.size(); ++i) div[i] += d[i];
  }
  return div;
}

Spectrum rhs_spectrum(const ThinFilmModel& model, const PeriodicField& eta) {
  const auto& g = eta.grid();
  const Spectrum c = forward(eta);

  // Δ^{(α-1)/2} η
  const int half = (model.alpha - 1) / 2;
  Spectrum q(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) q[i] = std::pow(-squared_wavenumber(g, i), half) * c[i];
  Spectrum out = mobility_divergence(model, eta, q);
  const double lead = (half % 2 == 0 ? 1.0 : -1.0) * model.c;
  for (auto& z : out) z *= lead;

  if (model.potential) {
    const auto& pot = *model.potential;
    PeriodicField dphi(g);
    for (std::size_t i = 0; i < eta.size(); ++i) dphi[i] = pot.derivative(eta[i]);
    const Spectrum pterm = mobility_divergence(model, eta, forward(dphi));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += pterm[i];
  }

  if (model.v_D != 0.0) {
    const Spectrum dx = derivative_spectrum(g, c, 0);
    const double a = model.drift_prefactor * model.v_D;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= a * dx[i];
  }
  out[0] = 0.0;
  return out;
}

void check_positive(const ThinFilmModel& model, const PeriodicField& eta) {
  if (!eta.finite()) throw Breakdown("non-finite film height");
  const bool needs = uses_mobility(model) ||
                     (model.potential && model.potential->kind == Potential::Kind::van_der_waals);
  if (needs && !(eta.min() > 0.0)) {
    throw PositivityViolation("film height must stay positive, min = " + std::to_string(eta.min()));
  }
}

double frozen_mobility(const ThinFilmModel& model, const PeriodicField& eta) {
  if (!uses_mobility(model)) return 1.0;
  const double m = eta.max();
  return model.mobility_scale * m * m * m;
}

Complex phi1(Complex z) {
  if (std::abs(z) < 1e-5) return 1.0 + z / 2.0 + z * z / 6.0;
  return (std::exp(z) - 1.0) / z;
}

FilmState exponential_euler(const ThinFilmModel& model, const FilmState& s, double dt) {
  const auto& g = s.eta.grid();
  const Spectrum c = forward(s.eta);
  const Spectrum full = rhs_spectrum(model, s.eta);
  const double mstar = frozen_mobility(model, s.eta);
  const double drift = model.drift_prefactor * model.v_D;
  Spectrum next(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    // constant-coefficient part: frozen leading operator and the drift transport
    const int k1 = g.wavevector(i)[0];
    const double transport = k1 == -g.n / 2 ? 0.0 : drift * kTwoPi * k1;
    const Complex L(-model.c * mstar * std::pow(squared_wavenumber(g, i), (model.alpha + 1) / 2), -transport);
    const Complex remainder = full[i] - L * c[i];
    const Complex z = L * dt;
    next[i] = std::exp(z) * c[i] + dt * phi1(z) * remainder;
  }
  return {inverse(g, next), s.t + dt};
}

}  // namespace

double Potential::derivative(double eta) const {
  switch (kind) {
    case Kind::gravity:
      return coefficient * eta;
    case Kind::van_der_waals:
      return coefficient / (eta * eta * eta);
  }
  return 0.0;
}

void ThinFilmModel::validate() const {
  if (alpha != 1 && alpha != 3 && alpha != 5) throw InvalidParameter("alpha must be 1, 3 or 5");
  if (!(c >= 0.0)) throw InvalidParameter("leading coefficient must be nonnegative");
  if (!(mobility_scale > 0.0)) throw InvalidParameter("mobility scale must be positive");
  if (linearized && potential) throw InvalidParameter("a linearized model cannot carry a potential");
  if (!std::isfinite(v_D) || !std::isfinite(drift_prefactor)) throw InvalidParameter("drift must be finite");
}

PeriodicField rhs(const ThinFilmModel& model, const PeriodicField& eta) {
  model.validate();
  check_positive(model, eta);
  return inverse(eta.grid(), rhs_spectrum(model, eta));
}

FilmState step(const ThinFilmModel& model, const FilmState& state, double dt, const StepOptions& opts) {
  if (!(dt > 0.0)) throw InvalidParameter("time step must be positive");
  model.validate();
  check_positive(model, state.eta);
  const bool monitored = uses_mobility(model);
  for (int h = 0; h <= opts.max_halvings; ++h) {
    const long substeps = 1L << h;
    const double sub = dt / static_cast<double>(substeps);
    FilmState s = state;
    bool ok = true;
    for (long k = 0; k < substeps && ok; ++k) {
      s = exponential_euler(model, s, sub);
      ok = s.eta.finite() && (!monitored || s.eta.min() >= opts.floor);
    }
    if (ok) {
      s.t = state.t + dt;
      return s;
    }
  }
  throw FilmBreakdown("positivity floor not reachable after " + std::to_string(opts.max_halvings) +
                          " step halvings at t = " + std::to_string(state.t),
                      state);
}

double film_energy(const ThinFilmModel& model, const PeriodicField& eta) {
  const auto& g = eta.grid();
  const Spectrum c = forward(eta);
  // same Nyquist convention as the derivative operators: odd-order fields drop it
  double e = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double K2 = squared_wavenumber(g, i);
    double w = 1.0;
    if (!model.linearized && model.alpha == 5) {
      w = K2 * K2;
    } else if (!model.linearized && model.alpha == 3) {
      const Wavevector k = g.wavevector(i);
      double s = 0.0;
      for (int a = 0; a < g.dim; ++a) {
        if (k[a] != -g.n / 2) s += kTwoPi * kTwoPi * static_cast<double>(k[a]) * k[a];
      }
      w = s;
    }
    e += w * std::norm(c[i]);
  }
  return 0.5 * e;
}

double phi1(double z) {
  if (z == 0.0) return 1.0;
  return std::expm1(z) / z;
}

double phi2(double z) {
  if (std::abs(z) < 0.1) {
    // Σ z^k/(k+2)!
    double term = 0.5;
    double s = term;
    for (int k = 1; k <= 12; ++k) {
      term *= z / (k + 2);
      s += term;
    }
    return s;
  }
  return (std::expm1(z) - z) / (z * z);
}

std::vector<FilmState> solve_linear_sixth(double c, const FilmSource& F, const PeriodicField& eta0, double T_end,
                                          double dt, int output_every) {
  if (!(c > 0.0)) throw InvalidParameter("coefficient must be positive");
  if (!(T_end >= 0.0) || !(dt > 0.0)) throw InvalidParameter("time horizon and step must be positive");
  if (output_every < 1) throw InvalidParameter("output_every must be at least 1");
  const auto& g = eta0.grid();
  const long steps = T_end == 0.0 ? 0 : static_cast<long>(std::ceil(T_end / dt - 1e-9));
  const double h = steps ? T_end / static_cast<double>(steps) : 0.0;

  std::vector<double> z(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double K2 = squared_wavenumber(g, i);
    z[i] = -c * K2 * K2 * K2 * h;
  }
  std::vector<double> e(g.size());
  std::vector<double> p1(g.size());
  std::vector<double> p2(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    e[i] = std::exp(z[i]);
    p1[i] = phi1(z[i]);
    p2[i] = phi2(z[i]);
  }

  auto source = [&](double t) {
    if (!F) return Spectrum(g.size(), Complex{});
    const PeriodicField f = F(t);
    if (!(f.grid() == g)) throw GridMismatch("source and initial datum live on different grids");
    return forward(f);
  };

  std::vector<FilmState> out;
  out.push_back({eta0, 0.0});
  Spectrum u = forward(eta0);
  Spectrum f0 = source(0.0);
  for (long n = 1; n <= steps; ++n) {
    const double t = static_cast<double>(n) * h;
    const Spectrum f1 = source(t);
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = e[i] * u[i] + h * (p1[i] * f0[i] + p2[i] * (f1[i] - f0[i]));
    }
    f0 = f1;
    if (n % output_every == 0 || n == steps) out.push_back({inverse(g, u), t});
  }
  return out;
}

PeriodicField solve_reynolds_stationary(const PeriodicField& eta, double v_D, double nu) {
  const auto& g = eta.grid();
  if (g.dim != 1) throw InvalidParameter("the stationary Reynolds solve is one-dimensional");
  if (!(nu > 0.0)) throw InvalidParameter("nu must be positive");
  if (!eta.finite() || !(eta.min() > 0.0)) throw PositivityViolation("film profile must be positive");

  // η³ ∂p = 6νv_D η + C, with C fixed by periodicity of p
  PeriodicField inv2(g);
  PeriodicField inv3(g);
  for (std::size_t i = 0; i < eta.size(); ++i) {
    inv2[i] = 1.0 / (eta[i] * eta[i]);
    inv3[i] = inv2[i] / eta[i];
  }
  const double a = 6.0 * nu * v_D;
  const double C = -a * mean_value(inv2) / mean_value(inv3);
  PeriodicField dp(g);
  for (std::size_t i = 0; i < eta.size(); ++i) dp[i] = a * inv2[i] + C * inv3[i];

  Spectrum s = forward(dp);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int k = g.wavevector(i)[0];
    s[i] = (k == 0 || k == -g.n / 2) ? Complex{} : s[i] / Complex(0.0, kTwoPi * k);
  }
  return inverse(g, s);
}

}  // namespace lubelastic
