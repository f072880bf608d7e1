#include "lubelastic/scaling.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "lubelastic/errors.hpp"

namespace lubelastic {

Exponent::Exponent(std::int64_t num, std::int64_t den) {
  if (den == 0) throw InvalidParameter("exponent with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  num_ = g ? num / g : 0;
  den_ = g ? den / g : 1;
}

Exponent Exponent::from_double(double x) {
  if (!std::isfinite(x)) throw InvalidParameter("non-finite exponent");
  for (std::int64_t q = 1; q <= 1000000; ++q) {
    const double p = std::round(x * static_cast<double>(q));
    if (std::abs(x - p / static_cast<double>(q)) < 1e-12) {
      return Exponent(static_cast<std::int64_t>(p), q);
    }
  }
  throw InvalidParameter("exponent " + std::to_string(x) + " is not a small rational");
}

Exponent Exponent::parse(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) {
      std::size_t used = 0;
      const double x = std::stod(text, &used);
      if (used != text.size()) throw InvalidParameter("trailing characters");
      return from_double(x);
    }
    std::size_t used_n = 0;
    std::size_t used_d = 0;
    const std::string ns = text.substr(0, slash);
    const std::string ds = text.substr(slash + 1);
    const long long n = std::stoll(ns, &used_n);
    const long long d = std::stoll(ds, &used_d);
    if (used_n != ns.size() || used_d != ds.size()) throw InvalidParameter("trailing characters");
    return Exponent(n, d);
  } catch (const std::logic_error&) {
    throw InvalidParameter("cannot parse exponent '" + text + "'");
  } catch (const InvalidParameter&) {
    throw InvalidParameter("cannot parse exponent '" + text + "'");
  }
}

std::string Exponent::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Exponent operator+(Exponent a, Exponent b) {
  return Exponent(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

Exponent operator-(Exponent a, Exponent b) { return a + (-b); }

Exponent operator*(Exponent a, Exponent b) { return Exponent(a.num_ * b.num_, a.den_ * b.den_); }

std::strong_ordering operator<=>(const Exponent& a, const Exponent& b) {
  return a.num_ * b.den_ <=> b.num_ * a.den_;
}

double pow_eps(double eps, Exponent p) {
  int e2 = 0;
  const double mant = std::frexp(eps, &e2);
  if (mant == 0.5) {
    // eps = 2^(e2-1); exact whenever (e2-1)*p is an integer
    const std::int64_t log2eps = e2 - 1;
    if ((log2eps * p.num()) % p.den() == 0) {
      return std::ldexp(1.0, static_cast<int>(log2eps * p.num() / p.den()));
    }
  }
  return std::pow(eps, p.value());
}

void ModelParams::validate(bool coupled) const {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidParameter("eps must lie in (0,1)");
  if (!(kappa > Exponent(0))) throw InvalidRegime("kappa must be positive, got " + kappa.str());
  if (!(nu > 0.0)) throw InvalidParameter("nu must be positive");
  if (!(rho_f >= 0.0)) throw InvalidParameter("rho_f must be nonnegative");
  if (!(rho_s >= 0.0)) throw InvalidParameter("rho_s must be nonnegative");
  if (!(B > 0.0)) throw InvalidParameter("B must be positive");
  if (!(theta >= 0.0)) throw InvalidParameter("theta must be nonnegative");
  if (!std::isfinite(v_D)) throw InvalidParameter("v_D must be finite");
  if (dim != 1 && dim != 2) throw InvalidParameter("dim must be 1 or 2");
  if (coupled && tau != time_scale_exponent(kappa)) {
    throw InvalidRegime("coupled regime requires tau = kappa - 3 (kappa=" + kappa.str() +
                        ", tau=" + tau.str() + ")");
  }
}

void NonlinearScalingPreset::validate() const {
  if (!(B_hat > 0.0 && D_hat > 0.0 && rho_s_hat > 0.0)) {
    throw InvalidParameter("nonlinear scaling constants must be positive");
  }
}

double NonlinearScalingPreset::rigidity(double eps) const { return B_hat / eps; }
double NonlinearScalingPreset::viscoelasticity(double eps) const { return D_hat / (eps * eps); }
double NonlinearScalingPreset::plate_density(double eps) const { return rho_s_hat / eps; }
double NonlinearScalingPreset::time_scale(double eps) const { return 1.0 / (eps * eps); }

Exponent time_scale_exponent(Exponent kappa) {
  if (!(kappa > Exponent(0))) throw InvalidRegime("kappa must be positive, got " + kappa.str());
  return kappa - Exponent(3);
}

double time_scale_exponent(double kappa) {
  if (!(kappa > 0.0)) throw InvalidRegime("kappa must be positive");
  return kappa - 3.0;
}

RegimeCheck validate_theorem_regime(Exponent kappa) {
  RegimeCheck r;
  if (!(kappa > Exponent(0))) {
    r.reason = "kappa = " + kappa.str() + " violates kappa > 0";
    return r;
  }
  if (kappa > Exponent(5, 2)) {
    r.reason = "kappa = " + kappa.str() + " violates kappa <= 5/2 (tau <= -1/2)";
    r.warn = kappa < Exponent(3);
    return r;
  }
  r.pass = true;
  return r;
}

RegimeCheck validate_theorem_regime(double kappa) {
  RegimeCheck r;
  if (!(kappa > 0.0)) {
    r.reason = "kappa violates kappa > 0";
    return r;
  }
  if (kappa > 2.5) {
    r.reason = "kappa violates kappa <= 5/2 (tau <= -1/2)";
    r.warn = kappa < 3.0;
    return r;
  }
  r.pass = true;
  return r;
}

double reduced_coefficient_e0(double B, double nu) {
  if (!(B > 0.0) || !(nu > 0.0)) throw InvalidParameter("B and nu must be positive");
  return B / (12.0 * nu);
}

double reduced_coefficient_eh(const LameParams& lame, double nu) {
  if (!(lame.mu > 0.0) || !(nu > 0.0)) throw InvalidParameter("mu and nu must be positive");
  if (!(lame.lambda >= 0.0)) throw InvalidParameter("lambda must be nonnegative");
  const double mu = lame.mu;
  const double la = lame.lambda;
  return 2.0 * mu * (mu + la) / (9.0 * nu * (2.0 * mu + la));
}

double reynolds_number(double rho_f, double L, double mu, double T) {
  if (!(rho_f > 0.0 && L > 0.0 && mu > 0.0 && T > 0.0)) {
    throw InvalidParameter("Reynolds number inputs must be positive");
  }
  return rho_f * L * L / (mu * T);
}

void to_json(nlohmann::json& j, const Exponent& e) {
  if (e.den() == 1) {
    j = e.num();
  } else {
    j = e.str();
  }
}

void from_json(const nlohmann::json& j, Exponent& e) {
  if (j.is_string()) {
    e = Exponent::parse(j.get<std::string>());
  } else if (j.is_number_integer()) {
    e = Exponent(j.get<std::int64_t>());
  } else if (j.is_number()) {
    e = Exponent::from_double(j.get<double>());
  } else {
    throw InvalidParameter("exponent must be a number or a \"p/q\" string");
  }
}

void to_json(nlohmann::json& j, const ModelParams& p) {
  j = nlohmann::json{{"rho_f", p.rho_f}, {"nu", p.nu},   {"rho_s", p.rho_s}, {"B", p.B},
                     {"theta", p.theta}, {"eps", p.eps}, {"kappa", p.kappa}, {"tau", p.tau},
                     {"v_D", p.v_D},     {"dim", p.dim}};
}

void from_json(const nlohmann::json& j, ModelParams& p) {
  if (!j.is_object()) throw InvalidParameter("model parameters must be a JSON object");
  bool tau_given = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "rho_f") {
      p.rho_f = value.get<double>();
    } else if (key == "nu") {
      p.nu = value.get<double>();
    } else if (key == "rho_s") {
      p.rho_s = value.get<double>();
    } else if (key == "B") {
      p.B = value.get<double>();
    } else if (key == "theta") {
      p.theta = value.get<double>();
    } else if (key == "eps") {
      p.eps = value.get<double>();
    } else if (key == "kappa") {
      p.kappa = value.get<Exponent>();
    } else if (key == "tau") {
      p.tau = value.get<Exponent>();
      tau_given = true;
    } else if (key == "v_D") {
      p.v_D = value.get<double>();
    } else if (key == "dim") {
      p.dim = value.get<int>();
    } else {
      throw InvalidParameter("unknown model parameter '" + key + "'");
    }
  }
  if (!tau_given && p.kappa > Exponent(0)) p.tau = time_scale_exponent(p.kappa);
}

}  // namespace lubelastic
