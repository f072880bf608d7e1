#pragma once

/**
 * @file scaling.hpp
 * @brief Parameters, exponents and coefficient maps of the thin-film FSI hierarchy.
 *
 * All quantities are nondimensional. Structure parameters are stored as the
 * ε-independent "hatted" constants; the physical values entering the ε-problem
 * are B^ε = B ε^{-κ} and ρ_s^ε = ρ_s ε^{-κ}, and the time scale is T = ε^τ.
 */

#include <compare>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace lubelastic {

/// Exact rational exponent (κ, τ, ...). Always stored in lowest terms with den > 0.
class Exponent {
 public:
  constexpr Exponent() = default;
  Exponent(std::int64_t num, std::int64_t den = 1);

  /// Parses "5/2", "-1", "2.5" (decimals are converted exactly when the
  /// denominator is at most 10^6).
  static Exponent parse(const std::string& text);
  /// Recovers a rational from a double when |x - p/q| < 1e-12 for some q <= 10^6.
  static Exponent from_double(double x);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  friend Exponent operator+(Exponent a, Exponent b);
  friend Exponent operator-(Exponent a, Exponent b);
  friend Exponent operator-(Exponent a) { return Exponent(-a.num_, a.den_); }
  friend Exponent operator*(Exponent a, Exponent b);
  friend bool operator==(const Exponent&, const Exponent&) = default;
  friend std::strong_ordering operator<=>(const Exponent& a, const Exponent& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// ε^p. Exact (via ldexp) when ε is a power of two and p·log2(ε) is an integer.
double pow_eps(double eps, Exponent p);

struct ModelParams {
  double rho_f = 1.0;
  double nu = 1.0;
  double rho_s = 1.0;  ///< ρ̂_s, physical value ρ_s ε^{-κ}
  double B = 1.0;      ///< B̂, physical value B ε^{-κ}
  double theta = 0.0;  ///< plate visco-elasticity ϑ
  double eps = 0.125;
  Exponent kappa{2};
  Exponent tau{-1};
  double v_D = 0.0;
  int dim = 1;  ///< number of horizontal directions (d - 1)

  /// Throws InvalidParameter / InvalidRegime on a violated invariant.
  /// With `coupled` the relation τ = κ - 3 is enforced.
  void validate(bool coupled = true) const;

  double time_scale() const { return pow_eps(eps, tau); }           ///< T = ε^τ
  double rigidity() const { return B * pow_eps(eps, -kappa); }       ///< B^ε
  double plate_density() const { return rho_s * pow_eps(eps, -kappa); }  ///< ρ_s^ε
};

struct LameParams {
  double mu = 1.0;
  double lambda = 0.0;
};

/// Parameter preset of the nonlinear moving-domain problem:
/// B = B̂ε^{-1}, D = D̂ε^{-2}, ρ_s = ρ̂_sε^{-1}, T = ε^{-2}.
struct NonlinearScalingPreset {
  double B_hat = 1.0;
  double D_hat = 1.0;
  double rho_s_hat = 1.0;

  void validate() const;
  double rigidity(double eps) const;
  double viscoelasticity(double eps) const;
  double plate_density(double eps) const;
  double time_scale(double eps) const;
  /// Expected ε-power of the uniform energy bound C t ε^3.
  static constexpr int energy_bound_exponent = 3;
  /// Expected ε-power of the uniform displacement bound ‖η^ε‖_∞ ≤ C ε.
  static constexpr int displacement_bound_exponent = 1;
};

/// τ = κ - 3, the time scale on which plate bending balances the film pressure.
Exponent time_scale_exponent(Exponent kappa);
double time_scale_exponent(double kappa);

struct RegimeCheck {
  bool pass = false;
  /// κ in (5/2, 3): solvers still run, the error-rate guarantee does not apply.
  bool warn = false;
  std::string reason;
};

RegimeCheck validate_theorem_regime(Exponent kappa);
RegimeCheck validate_theorem_regime(double kappa);

/// Coefficient B/(12ν) of the linear sixth-order reduced model.
double reduced_coefficient_e0(double B, double nu);
/// Coefficient 2μ(μ+λ)/(9ν(2μ+λ)) of the reduced model for a thick elastic layer.
double reduced_coefficient_eh(const LameParams& lame, double nu);
/// Re = ρ_f L² / (μ T).
double reynolds_number(double rho_f, double L, double mu, double T);

void to_json(nlohmann::json& j, const Exponent& e);
void from_json(const nlohmann::json& j, Exponent& e);
/// Flat key/value document; unknown keys are rejected.
void to_json(nlohmann::json& j, const ModelParams& p);
void from_json(const nlohmann::json& j, ModelParams& p);

}  // namespace lubelastic
