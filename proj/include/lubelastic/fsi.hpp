#pragma once

/**
 * @file fsi.hpp
 * @brief Linear Stokes flow in a thin periodic channel coupled to a visco-elastic plate.
 *
 * Unknowns live on the reference domain ω × (-1,0) in rescaled time t = t_phys / T,
 * T = ε^τ. The velocity v and displacement η are the physical (unrescaled) fields:
 *
 *   ρ_f T⁻¹ ∂t v - ν Δ_ε v + ∇_ε p = f,   div_ε v = 0,
 *   v = 0 at y = -1,   v = (0, T⁻¹ ∂t η) at y = 0,
 *   ρ_s^ε T⁻² ∂tt η + B^ε (Δ')² η + ϑ T⁻¹ (Δ')² ∂t η = p|_{y=0},
 *
 * with ∇_ε = (∇', ε⁻¹ ∂_y), B^ε = B ε^{-κ} and ρ_s^ε = ρ_s ε^{-κ}.
 *
 * Each horizontal Fourier mode is an independent saddle-point system in y, discretized
 * by a Galerkin method on the Chebyshev–Gauss–Lobatto Lagrange basis: velocity of degree
 * m-1, pressure of degree m-3 (Lagrange on the interior nodes), all integrals exact.
 * The top vertical-velocity node carries the plate velocity, so the kinematic condition
 * holds by construction. Time stepping is backward Euler.
 */

#include <map>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "lubelastic/forcing.hpp"
#include "lubelastic/scaling.hpp"
#include "lubelastic/spectral.hpp"

namespace lubelastic {

struct FsiParams {
  ModelParams model;
  PeriodicGrid grid{1, 32};
  std::shared_ptr<const VerticalNodes> vnodes = std::make_shared<const VerticalNodes>(32);
  double dt = 1e-4;
  Forcing forcing;

  void validate() const;
};

struct FsiState {
  /// dim+1 velocity components; the last one is vertical.
  std::vector<ChannelField> v;
  ChannelField p;
  PeriodicField eta;
  /// ∂t η in rescaled time.
  PeriodicField eta_t;
  double t = 0.0;

  static FsiState zero(const FsiParams& params);
};

/// Index layout of the per-mode unknown vector.
struct ModeLayout {
  int m = 0;
  int dim = 1;

  int horizontal(int alpha) const { return alpha * (m - 2); }  ///< first interior node of v_α
  int vertical() const { return dim * (m - 2); }               ///< node 1 of v_3
  int top() const { return vertical() + m - 2; }               ///< plate velocity (v_3 at y = 0)
  int pressure() const { return vertical() + m - 1; }
  int size() const { return pressure() + m - 2; }
  int velocity_size() const { return pressure(); }
};

/// Exact Galerkin matrices of the vertical discretization.
struct VerticalOperators {
  Eigen::MatrixXd mass;       ///< ∫ ℓ_i ℓ_j
  Eigen::MatrixXd stiffness;  ///< ∫ ℓ_i' ℓ_j'
  Eigen::MatrixXd coupling;   ///< ∫ ℓ_i π_j
  Eigen::MatrixXd dcoupling;  ///< ∫ ℓ_i' π_j
  Eigen::MatrixXd pmass;      ///< ∫ π_i π_j
  /// Values of the pressure polynomial at all m nodes from its interior-node values.
  Eigen::MatrixXd pressure_extension;

  explicit VerticalOperators(const VerticalNodes& vn);
};

/// Factorized backward-Euler operator of one Fourier mode.
class ModeOperator {
 public:
  ModeOperator(Eigen::MatrixXcd matrix, ModeLayout layout);

  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  const ModeLayout& layout() const { return layout_; }
  /// Solve with equilibration and one step of iterative refinement.
  Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;

 private:
  Eigen::MatrixXcd matrix_;
  ModeLayout layout_;
  Eigen::VectorXd row_scale_;
  Eigen::VectorXd col_scale_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
};

/// Assembles and factorizes the coupled system for wavevector k.
ModeOperator assemble_mode_system(const FsiParams& params, const Wavevector& k, double dt);
/// lim_{dt→0} dt·A(dt): the inertia blocks ερ_f T⁻¹ M and ρ_s^ε T⁻¹.
Eigen::MatrixXcd mass_operator(const FsiParams& params, const Wavevector& k);
/// εν(ε⁻² S + |K|² M) on the velocity unknowns (block diagonal over components).
Eigen::MatrixXd viscous_block(const FsiParams& params, const Wavevector& k);

struct EnergyEntry {
  int step = 0;
  double t = 0.0;
  double kinetic_fluid = 0.0;  ///< ½ ε ρ_f ∫|v|²
  double kinetic_plate = 0.0;  ///< ½ ρ_s^ε ∫|T⁻¹∂tη|²
  double bending = 0.0;        ///< ½ B^ε ∫|Δ'η|²
  // increments over the step, physical-time integrals
  double viscous = 0.0;        ///< ∫ εν |∇_ε v|²
  double viscoelastic = 0.0;   ///< ∫ ϑ |Δ' T⁻¹∂tη|²
  double work = 0.0;           ///< ∫ ε ∫ f·v
  double numerical = 0.0;      ///< backward-Euler dissipation
  double cum_viscous = 0.0;
  double cum_viscoelastic = 0.0;
  double cum_work = 0.0;
  double cum_numerical = 0.0;

  double total_energy() const { return kinetic_fluid + kinetic_plate + bending; }
};

struct EnergyLedger {
  double eps = 0.0;
  double time_scale = 1.0;
  Exponent kappa;
  /// Entry 0 is the initial state; entry n follows step n.
  std::vector<EnergyEntry> entries;
};

/// Invariant diagnostics of one state.
struct FsiDiagnostics {
  double divergence_ratio = 0.0;  ///< ‖Π div_ε v‖ / ‖∇_ε v‖, Π the projection on the pressure space
  double top_horizontal = 0.0;    ///< max |v_α(y=0)|
  double kinematic = 0.0;         ///< max |v_3(y=0) - T⁻¹ ∂t η|
  double eta_mean = 0.0;
};

/// Modal time stepper; only modes with nonzero state or forcing are solved.
class FsiSolver {
 public:
  explicit FsiSolver(FsiParams params);
  FsiSolver(FsiParams params, const FsiState& initial);

  void step();
  double time() const { return t_; }
  int steps() const { return step_; }
  FsiState state() const;
  const EnergyLedger& ledger() const { return ledger_; }
  FsiDiagnostics diagnostics() const;
  const FsiParams& params() const { return params_; }
  /// Wavevectors currently carried by the solution.
  std::vector<Wavevector> active_modes() const;

 private:
  struct Mode {
    Wavevector k{};
    Eigen::VectorXcd x;
    Complex eta{};
  };

  Mode& mode(const Wavevector& k);
  const ModeOperator& op(const Wavevector& k);
  Eigen::VectorXcd forcing_load(const Wavevector& k, double t) const;
  EnergyEntry energies() const;

  FsiParams params_;
  VerticalOperators vops_;
  ModeLayout layout_;
  double t0_ = 0.0;
  double t_ = 0.0;
  int step_ = 0;
  std::map<std::size_t, Mode> modes_;
  std::map<std::size_t, ModeOperator> ops_;
  EnergyLedger ledger_;
};

/// Advances a nodal state by one step.
FsiState step_fsi(const FsiParams& params, const FsiState& state);

struct FsiRun {
  std::vector<FsiState> snapshots;
  EnergyLedger ledger;
  RegimeCheck regime;
  /// Worst invariant diagnostics over all steps.
  FsiDiagnostics worst;
};

/// Integrates from zero initial data to T_end with dt' = T_end / ceil(T_end/dt), storing
/// snapshots at t = 0, every `output_every` steps and at T_end. The theorem regime is
/// evaluated and reported, not enforced.
FsiRun run_fsi(const FsiParams& params, double T_end, int output_every = 1);

}  // namespace lubelastic
