#pragma once

/**
 * @file verify.hpp
 * @brief Error norms between full-order and approximate solutions, rate fits over an
 * ε-ladder and energy audits.
 */

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lubelastic/fsi.hpp"
#include "lubelastic/reconstruction.hpp"

namespace lubelastic {

/// √(∫₀ᵀ ε ∫_{Ω_-} |·|²): vertical quadrature, exact horizontal sums, trapezoid in time.
/// samples[i] holds the components of the field at times[i].
double thin_norm_L2L2(const std::vector<std::vector<ChannelField>>& samples, double eps,
                      const std::vector<double>& times);
double thin_norm_L2L2(const std::vector<ChannelField>& samples, double eps, const std::vector<double>& times);

/// max_i ‖η_i‖_{H²}, ‖η‖²_{H²} = Σ (1 + |K|² + |K|⁴) |η̂_K|².
double norm_LinfH2(const std::vector<PeriodicField>& traj);

struct ErrorReport {
  double eps = 0.0;
  Exponent kappa;
  double err_velocity = 0.0;
  double err_pressure = 0.0;
  double err_displacement = 0.0;
  /// E(T) / (t_phys ε³) with t_phys = ε^τ T.
  double energy_ratio = 0.0;
  double dt = 0.0;
  long steps = 0;
};

enum class ErrorNorm { velocity, pressure, displacement };
const char* to_string(ErrorNorm which);

struct RateFit {
  std::vector<std::pair<double, double>> points;  ///< (ε, error), ε decreasing
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least-squares fit of log(error) against log(ε). Needs at least three reports with a
/// common κ and distinct ε; a zero error raises DegenerateFit.
RateFit fit_rate(const std::vector<ErrorReport>& reports, ErrorNorm which);

struct EnergyAudit {
  /// E(t) / (t_phys ε³) for every entry with t > 0.
  std::vector<double> ratios;
  /// min over steps of (work - ΔE - dissipation), divided by the ledger's energy scale.
  double worst_slack = 0.0;
  double terminal_ratio = 0.0;
};

/// Checks the discrete energy inequality step by step. Throws AuditFailure with the step
/// index on a negative dissipation or an inequality violated beyond `tolerance` (relative).
EnergyAudit energy_audit(const EnergyLedger& ledger, double tolerance = 1e-12);

/// Compares FSI snapshots with the approximation at matching times.
ErrorReport compare(const std::vector<FsiState>& full, const std::vector<FsiState>& approx, const ModelParams& params);

/// Relative L²(0,T;L²(ω)) residual of the flux relation -∫ div' v dy = ∂t η along the
/// reduced trajectory, with ∂t η taken from the reduced equation.
double chain_closure(const ReducedSolution& reduced, const ModelParams& params, const Forcing& f,
                     std::shared_ptr<const VerticalNodes> vnodes);

struct LadderSpec {
  ModelParams model;  ///< eps is overwritten per rung
  std::vector<double> eps;
  Forcing forcing;
  int n = 32;
  int m = 32;
  double dt = 1e-5;
  double T_end = 0.5;
  /// Number of snapshot intervals shared by the full and reduced trajectories.
  int samples = 100;
  double reduced_dt = 1e-5;
  /// Run the dt/2 and m+8 refinement pre-pass at the smallest ε.
  bool refinement = true;

  struct Thresholds {
    double velocity = 2.7;
    double pressure = 0.6;
    double displacement = 2.2;
    double r2 = 0.98;
    double energy_spread = 3.0;
  } thresholds;

  /// Throws InvalidParameter (empty or non-decreasing ladder, bad resolution).
  void validate() const;
};

struct RefinementCheck {
  bool ran = false;
  /// Model error over the self-convergence difference, per norm, under dt/2 and under m+8.
  double velocity_dt = 0.0, pressure_dt = 0.0, displacement_dt = 0.0;
  double velocity_m = 0.0, pressure_m = 0.0, displacement_m = 0.0;
  bool pass = false;  ///< all ratios ≥ 10
};

struct RateStudy {
  std::vector<ErrorReport> reports;
  RateFit velocity, pressure, displacement;
  std::vector<EnergyAudit> audits;
  double energy_spread = 0.0;  ///< max/min terminal energy ratio over the ladder
  double closure = 0.0;        ///< chain_closure at the largest ε
  RefinementCheck refinement;
  bool rates_pass = false;
  bool energy_pass = false;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Runs the reduced model once and the FSI solver per ε, at most `jobs` at a time.
RateStudy run_rate_study(const LadderSpec& spec, int jobs = 1, const ProgressFn& progress = {});

void to_json(nlohmann::json& j, const ErrorReport& r);
void to_json(nlohmann::json& j, const RateFit& f);
void to_json(nlohmann::json& j, const RateStudy& s);
void write_reports_csv(std::ostream& os, const std::vector<ErrorReport>& reports);

}  // namespace lubelastic
