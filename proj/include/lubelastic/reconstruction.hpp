#pragma once

/**
 * @file reconstruction.hpp
 * @brief Approximate FSI solution built from the sixth-order reduced model.
 *
 * Limit relations on the reference channel y ∈ (-1,0):
 *   p = B (Δ')² η,
 *   v_α = (1/2ν) y(y+1) ∂_α p + F_α,   -ν ∂_y² F_α = f_α,  F_α(-1) = F_α(0) = 0,
 *   ∂t η = (B/12ν) (Δ')³ η + F,         F = -∫ div' F_α dy,
 * and the approximation v̂ = ε²(v_α, v̂_3), v̂_3 = -ε ∫_{-1}^y div' v_α, p̂ = p, η̂ = ε^κ η.
 */

#include <memory>
#include <vector>

#include "lubelastic/forcing.hpp"
#include "lubelastic/fsi.hpp"
#include "lubelastic/scaling.hpp"
#include "lubelastic/thinfilm.hpp"

namespace lubelastic {

struct ReducedSolution {
  std::vector<FilmState> eta;
  double c = 1.0;
  FilmSource F;

  /// Throws InvalidParameter unless snapshots have zero mean and increasing times.
  void validate() const;
};

PeriodicField limit_pressure(const PeriodicField& eta, double B);

/// The dim horizontal limit velocities at time t.
std::vector<ChannelField> horizontal_velocity(const PeriodicField& p, const Forcing& f, double nu, double t,
                                              std::shared_ptr<const VerticalNodes> vnodes);

/// -ε ∫_{-1}^y div' v_h; the ε² prefactor of the approximation is not included.
ChannelField vertical_velocity(const std::vector<ChannelField>& vh, double eps);

/// Source of the reduced equation at time t. m is the vertical resolution of the
/// quadrature (exact for forcing profiles of degree below m - 2).
PeriodicField forcing_F(const Forcing& f, double nu, const PeriodicGrid& grid, double t, int m = 16);

/// Integrates the reduced equation from η = 0 with the solver of solve_linear_sixth.
ReducedSolution solve_reduced(const ModelParams& params, const Forcing& f, const PeriodicGrid& grid, double T_end,
                              double dt, int output_every = 1);

/// ∂t η at snapshot i: three-point differences on the (possibly nonuniform) time grid,
/// central inside, one-sided at the ends.
PeriodicField time_derivative(const std::vector<FilmState>& traj, std::size_t i);

/// Approximate (v̂, p̂, η̂) per snapshot, in the layout of the FSI solver's states.
/// eta_t holds ∂t η̂ in rescaled time.
std::vector<FsiState> assemble_approx(const ReducedSolution& reduced, const ModelParams& params, const Forcing& f,
                                      std::shared_ptr<const VerticalNodes> vnodes);

}  // namespace lubelastic
