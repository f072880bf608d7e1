#include "lubelastic/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lubelastic/errors.hpp"

namespace lubelastic {

namespace {

double polynomial(const std::vector<double>& p, double y) {
  double s = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) s = s * y + *it;
  return s;
}

}  // namespace

double TimeRamp::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  if (kind == Kind::step) return 1.0;
  const double s = t / t0;
  return -std::expm1(-s * s);
}

Forcing::Forcing(std::vector<ForcingHarmonic> harmonics, TimeRamp ramp)
    : harmonics_(std::move(harmonics)), ramp_(ramp) {
  if (ramp_.kind == TimeRamp::Kind::gaussian && !(ramp_.t0 > 0.0)) {
    throw InvalidParameter("ramp time must be positive");
  }
  for (const auto& h : harmonics_) {
    if (h.profile.empty()) throw InvalidParameter("forcing profile needs at least one coefficient");
    if (!std::isfinite(h.amplitude)) throw InvalidParameter("forcing amplitude must be finite");
  }
}

void Forcing::validate(const PeriodicGrid& grid) const {
  for (const auto& h : harmonics_) {
    if (h.component < 0 || h.component > grid.dim) throw InvalidParameter("forcing component out of range");
    if (std::abs(h.k[0]) >= grid.n / 2 || std::abs(h.k[1]) >= grid.n / 2) {
      throw InvalidParameter("forcing wavevector not resolved by the grid");
    }
    if (grid.dim == 1 && h.k[1] != 0) throw InvalidParameter("forcing wavevector has a second component on a 1D grid");
  }
}

std::vector<Complex> Forcing::coefficient(int component, const Wavevector& k, const VerticalNodes& vn,
                                          double t) const {
  std::vector<Complex> out(static_cast<std::size_t>(vn.size()), Complex{});
  const double r = ramp_(t);
  if (r == 0.0) return out;
  const Wavevector minus{-k[0], -k[1]};
  for (const auto& h : harmonics_) {
    if (h.component != component) continue;
    Complex c{};
    const bool zero = h.k[0] == 0 && h.k[1] == 0;
    if (zero) {
      if (k[0] == 0 && k[1] == 0 && !h.sine) c = 1.0;
    } else if (h.k == k) {
      c = h.sine ? Complex(0.0, -0.5) : Complex(0.5, 0.0);
    } else if (h.k == minus) {
      c = h.sine ? Complex(0.0, 0.5) : Complex(0.5, 0.0);
    }
    if (c == Complex{}) continue;
    for (int j = 0; j < vn.size(); ++j) out[j] += h.amplitude * r * polynomial(h.profile, vn.nodes()[j]) * c;
  }
  return out;
}

std::vector<Wavevector> Forcing::support() const {
  std::vector<Wavevector> s;
  for (const auto& h : harmonics_) {
    if (h.k[0] == 0 && h.k[1] == 0 && h.sine) continue;
    s.push_back(h.k);
    s.push_back({-h.k[0], -h.k[1]});
  }
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

std::vector<ChannelField> Forcing::sample(const PeriodicGrid& grid, std::shared_ptr<const VerticalNodes> vn,
                                          double t) const {
  std::vector<ChannelField> out;
  for (int c = 0; c <= grid.dim; ++c) out.emplace_back(grid, vn);
  const double r = ramp_(t);
  if (r == 0.0) return out;
  for (const auto& h : harmonics_) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto x = grid.coordinate(i);
      const double phase = 2.0 * std::numbers::pi * (h.k[0] * x[0] + h.k[1] * x[1]);
      const double trig = h.sine ? std::sin(phase) : std::cos(phase);
      for (int j = 0; j < vn->size(); ++j) {
        out[h.component].at(j, i) += h.amplitude * r * trig * polynomial(h.profile, vn->nodes()[j]);
      }
    }
  }
  return out;
}

Forcing Forcing::scaled(double a) const {
  Forcing f = *this;
  for (auto& h : f.harmonics_) h.amplitude *= a;
  return f;
}

Forcing single_harmonic_forcing(double amplitude, TimeRamp ramp) {
  ForcingHarmonic h;
  h.amplitude = amplitude;
  return Forcing({h}, ramp);
}

void to_json(nlohmann::json& j, const Forcing& f) {
  nlohmann::json hs = nlohmann::json::array();
  for (const auto& h : f.harmonics()) {
    hs.push_back({{"component", h.component},
                  {"k", {h.k[0], h.k[1]}},
                  {"amplitude", h.amplitude},
                  {"trig", h.sine ? "sin" : "cos"},
                  {"profile", h.profile}});
  }
  j = {{"harmonics", hs},
       {"ramp", f.ramp().kind == TimeRamp::Kind::step ? "step" : "gaussian"},
       {"ramp_time", f.ramp().t0}};
}

void from_json(const nlohmann::json& j, Forcing& f) {
  if (!j.is_object()) throw InvalidParameter("forcing must be a JSON object");
  TimeRamp ramp;
  std::vector<ForcingHarmonic> hs;
  for (const auto& [key, value] : j.items()) {
    if (key == "ramp") {
      const auto kind = value.get<std::string>();
      if (kind == "step") {
        ramp.kind = TimeRamp::Kind::step;
      } else if (kind == "gaussian") {
        ramp.kind = TimeRamp::Kind::gaussian;
      } else {
        throw InvalidParameter("unknown ramp '" + kind + "'");
      }
    } else if (key == "ramp_time") {
      ramp.t0 = value.get<double>();
    } else if (key == "harmonics") {
      for (const auto& item : value) {
        ForcingHarmonic h;
        for (const auto& [hk, hv] : item.items()) {
          if (hk == "component") {
            h.component = hv.get<int>();
          } else if (hk == "k") {
            const auto k = hv.get<std::vector<int>>();
            if (k.empty() || k.size() > 2) throw InvalidParameter("wavevector needs one or two entries");
            h.k = {k[0], k.size() > 1 ? k[1] : 0};
          } else if (hk == "amplitude") {
            h.amplitude = hv.get<double>();
          } else if (hk == "trig") {
            const auto t = hv.get<std::string>();
            if (t != "sin" && t != "cos") throw InvalidParameter("trig must be sin or cos");
            h.sine = t == "sin";
          } else if (hk == "profile") {
            h.profile = hv.get<std::vector<double>>();
          } else {
            throw InvalidParameter("unknown forcing harmonic key '" + hk + "'");
          }
        }
        hs.push_back(h);
      }
    } else {
      throw InvalidParameter("unknown forcing key '" + key + "'");
    }
  }
  f = Forcing(std::move(hs), ramp);
}

}  // namespace lubelastic
