#pragma once

/**
 * @file thinfilm.hpp
 * @brief Reduced thin-film models on the periodic cell.
 *
 * General family
 *   ∂tη = s c ∇·(m(η) ∇Δ^{(α-1)/2} η) + ∇·(m(η) ∇Φ'(η)) - a ∂_1(η v_D),
 * with s = (-1)^{(α-1)/2}, m(η) = mobility_scale·η³ (or 1 when linearized) and drift
 * prefactor a. α = 3 is the surface-tension film, α = 5 the plate-covered film.
 */

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lubelastic/errors.hpp"
#include "lubelastic/spectral.hpp"

namespace lubelastic {

struct Potential {
  enum class Kind { gravity, van_der_waals };
  Kind kind = Kind::gravity;
  double coefficient = 1.0;

  /// Φ'(η): G η for gravity, A/η³ for van der Waals.
  double derivative(double eta) const;
};

struct ThinFilmModel {
  int alpha = 5;
  double c = 1.0;
  double mobility_scale = 1.0;
  std::optional<Potential> potential;
  double v_D = 0.0;
  double drift_prefactor = 6.0;
  bool linearized = false;

  void validate() const;
};

struct FilmState {
  PeriodicField eta;
  double t = 0.0;
};

/// Thrown when the positivity floor cannot be kept; carries the last accepted state.
class FilmBreakdown : public Breakdown {
 public:
  FilmBreakdown(const std::string& what, FilmState last) : Breakdown(what), last_(std::move(last)) {}
  const FilmState& last_valid() const { return last_; }

 private:
  FilmState last_;
};

PeriodicField rhs(const ThinFilmModel& model, const PeriodicField& eta);

struct StepOptions {
  double floor = 1e-6;
  int max_halvings = 20;
};

/// One exponential-Euler step: the leading operator with mobility frozen at its maximum
/// and the drift transport are integrated exactly per Fourier mode, the remainder explicitly. The step is split
/// into 2^h substeps when min η would fall below the floor.
FilmState step(const ThinFilmModel& model, const FilmState& state, double dt, const StepOptions& opts = {});

/// Energy used for the dissipation diagnostics: ½∫(Δη)² (α=5), ½∫|∇η|² (α=3), ½∫η² otherwise.
double film_energy(const ThinFilmModel& model, const PeriodicField& eta);

using FilmSource = std::function<PeriodicField(double)>;

/// ∂tη = c Δ³η + F. Per-mode exponential integration, exact when F is linear in time
/// between steps. The step is adjusted to dt' = T_end / ceil(T_end/dt); snapshots are
/// returned at t=0, every `output_every` steps and at T_end. An empty source means F = 0.
std::vector<FilmState> solve_linear_sixth(double c, const FilmSource& F, const PeriodicField& eta0, double T_end,
                                          double dt, int output_every = 1);

/// Zero-mean periodic solution of -∂_1(η³ ∂_1 p) = -6 ν v_D ∂_1 η (one horizontal dimension).
PeriodicField solve_reynolds_stationary(const PeriodicField& eta, double v_D, double nu = 1.0);

/// φ1(z) = (e^z - 1)/z and φ2(z) = (e^z - 1 - z)/z², continuous at z = 0.
double phi1(double z);
double phi2(double z);

}  // namespace lubelastic
