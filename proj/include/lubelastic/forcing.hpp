#pragma once

/**
 * @file forcing.hpp
 * @brief Fluid volume forces given as finite sums of horizontal harmonics.
 *
 * Each harmonic contributes A·r(t)·P(y)·trig(2π k·x') to one velocity component, where
 * trig is sin or cos, P is a polynomial in the reference vertical variable y ∈ [-1,0]
 * and r is a time ramp. Components 0..dim-1 are horizontal, component dim is vertical.
 */

#include <vector>

#include <nlohmann/json.hpp>

#include "lubelastic/spectral.hpp"

namespace lubelastic {

struct TimeRamp {
  enum class Kind { step, gaussian };
  Kind kind = Kind::gaussian;
  double t0 = 0.1;

  /// 1 for t > 0 (step) or 1 - exp(-(t/t0)²) (gaussian).
  double operator()(double t) const;
};

struct ForcingHarmonic {
  int component = 0;
  Wavevector k{1, 0};
  double amplitude = 1.0;
  bool sine = true;
  /// Coefficients of P(y) = Σ p_i y^i.
  std::vector<double> profile{1.0};
};

class Forcing {
 public:
  Forcing() = default;
  Forcing(std::vector<ForcingHarmonic> harmonics, TimeRamp ramp);

  const std::vector<ForcingHarmonic>& harmonics() const { return harmonics_; }
  const TimeRamp& ramp() const { return ramp_; }
  bool empty() const { return harmonics_.empty(); }

  /// Throws InvalidParameter for components or wavevectors the grid cannot carry.
  void validate(const PeriodicGrid& grid) const;
  /// Fourier coefficient of component `component` at wavevector k, per vertical node.
  std::vector<Complex> coefficient(int component, const Wavevector& k, const VerticalNodes& vn, double t) const;
  /// Wavevectors (both signs) carried by the forcing.
  std::vector<Wavevector> support() const;
  /// Nodal samples of all dim+1 components.
  std::vector<ChannelField> sample(const PeriodicGrid& grid, std::shared_ptr<const VerticalNodes> vn, double t) const;
  Forcing scaled(double a) const;

 private:
  std::vector<ForcingHarmonic> harmonics_;
  TimeRamp ramp_;
};

/// f_1 = A sin(2π x_1) r(t), constant in y: the single-harmonic forcing of the rate studies.
Forcing single_harmonic_forcing(double amplitude, TimeRamp ramp);

void to_json(nlohmann::json& j, const Forcing& f);
void from_json(const nlohmann::json& j, Forcing& f);

}  // namespace lubelastic
