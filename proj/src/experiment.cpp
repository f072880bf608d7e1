#include "lubelastic/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "lubelastic/errors.hpp"

namespace lubelastic {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::thinfilm: return "thinfilm";
    case RunMode::fsi: return "fsi";
    case RunMode::rates: return "rates";
    case RunMode::reynolds: return "reynolds";
  }
  return "?";
}

RunMode parse_run_mode(const std::string& text) {
  for (RunMode m : {RunMode::thinfilm, RunMode::fsi, RunMode::rates, RunMode::reynolds}) {
    if (text == to_string(m)) return m;
  }
  throw ConfigError("unknown mode '" + text + "'");
}

PeriodicField InitialProfile::sample(const PeriodicGrid& grid) const {
  const double two_pi_k = 2.0 * std::numbers::pi * k;
  const double a = amplitude, c = mean;
  const bool s = sine;
  return PeriodicField::sample(grid, [=](double x, double) {
    return c + a * (s ? std::sin(two_pi_k * x) : std::cos(two_pi_k * x));
  });
}

namespace {

template <class Handler>
void read_object(const json& j, const std::string& what, Handler&& handle) {
  if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!handle(key, value)) throw ConfigError("unknown key '" + key + "' in " + what);
  }
}

bool is_power_of_two(double x) {
  int e = 0;
  return x > 0.0 && std::frexp(x, &e) == 0.5;
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    switch (mode) {
      case RunMode::thinfilm: {
        thinfilm.validate();
        const PeriodicGrid grid(1, resolution.n);
        if (!(initial.sample(grid).min() > 0.0)) throw ConfigError("initial film height must be positive");
        if (!(time.dt > 0.0)) throw ConfigError("time.dt must be positive");
        if (time.steps < 1) throw ConfigError("time.steps must be at least 1");
        if (time.output_every < 1) throw ConfigError("time.output_every must be at least 1");
        if (ansatz) {
          ansatz->constants.validate();
          if (!(ansatz->eps > 0.0 && ansatz->eps < 1.0)) throw ConfigError("ansatz.eps must lie in (0,1)");
        }
        break;
      }
      case RunMode::fsi:
        fsi_params().validate();
        if (!(time.T_end > 0.0)) throw ConfigError("time.T_end must be positive");
        if (time.output_every < 1) throw ConfigError("time.output_every must be at least 1");
        break;
      case RunMode::rates:
        if (eps.empty()) throw ConfigError("ladder.eps is empty");
        for (std::size_t i = 0; i < eps.size(); ++i) {
          if (!is_power_of_two(eps[i]) || eps[i] >= 1.0) throw ConfigError("ladder.eps entries must be powers of two below 1");
          if (i > 0 && !(eps[i] < eps[i - 1])) throw ConfigError("ladder.eps must be strictly decreasing");
        }
        ladder().validate();
        break;
      case RunMode::reynolds: {
        const PeriodicGrid grid(1, resolution.n);
        if (!(initial.sample(grid).min() > 0.0)) throw ConfigError("film profile must be positive");
        if (!(model.nu > 0.0)) throw ConfigError("model.nu must be positive");
        if (!std::isfinite(model.v_D)) throw ConfigError("model.v_D must be finite");
        break;
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

FsiParams ExperimentConfig::fsi_params() const {
  FsiParams p;
  p.model = model;
  p.grid = PeriodicGrid(model.dim, resolution.n);
  p.vnodes = std::make_shared<const VerticalNodes>(resolution.m);
  p.dt = time.dt;
  p.forcing = forcing;
  return p;
}

LadderSpec ExperimentConfig::ladder() const {
  LadderSpec s;
  s.model = model;
  s.eps = eps;
  s.forcing = forcing;
  s.n = resolution.n;
  s.m = resolution.m;
  s.dt = time.dt;
  s.T_end = time.T_end;
  s.samples = time.samples;
  s.reduced_dt = time.reduced_dt;
  s.refinement = refinement;
  s.thresholds = thresholds;
  return s;
}

void to_json(json& j, const ExperimentConfig& c) {
  json potential = nullptr;
  if (c.thinfilm.potential) {
    potential = {{"kind", c.thinfilm.potential->kind == Potential::Kind::gravity ? "gravity" : "van_der_waals"},
                 {"coefficient", c.thinfilm.potential->coefficient}};
  }
  json ansatz = nullptr;
  if (c.ansatz) {
    ansatz = {{"B_hat", c.ansatz->constants.B_hat},
              {"D_hat", c.ansatz->constants.D_hat},
              {"rho_s_hat", c.ansatz->constants.rho_s_hat},
              {"eps", c.ansatz->eps}};
  }
  const auto& t = c.thresholds;
  j = {{"version", ExperimentConfig::current_version},
       {"mode", to_string(c.mode)},
       {"model", c.model},
       {"thinfilm",
        {{"alpha", c.thinfilm.alpha},
         {"c", c.thinfilm.c},
         {"mobility_scale", c.thinfilm.mobility_scale},
         {"potential", potential},
         {"v_D", c.thinfilm.v_D},
         {"drift_prefactor", c.thinfilm.drift_prefactor},
         {"linearized", c.thinfilm.linearized}}},
       {"ansatz", ansatz},
       {"initial",
        {{"mean", c.initial.mean},
         {"amplitude", c.initial.amplitude},
         {"k", c.initial.k},
         {"trig", c.initial.sine ? "sin" : "cos"}}},
       {"ladder", {{"eps", c.eps}}},
       {"forcing", c.forcing},
       {"resolution", {{"n", c.resolution.n}, {"m", c.resolution.m}}},
       {"time",
        {{"dt", c.time.dt},
         {"T_end", c.time.T_end},
         {"steps", c.time.steps},
         {"output_every", c.time.output_every},
         {"samples", c.time.samples},
         {"reduced_dt", c.time.reduced_dt}}},
       {"verify",
        {{"refinement", c.refinement},
         {"velocity", t.velocity},
         {"pressure", t.pressure},
         {"displacement", t.displacement},
         {"r2", t.r2},
         {"energy_spread", t.energy_spread}}},
       {"output_dir", c.output_dir}};
}

void from_json(const json& j, ExperimentConfig& c) {
  try {
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    if (!j.contains("version")) throw ConfigError("configuration needs a version field");
    if (!j.at("version").is_number_integer() || j.at("version").get<int>() != ExperimentConfig::current_version) {
      throw ConfigError("unsupported configuration version " + j.at("version").dump());
    }
    if (!j.contains("mode")) throw ConfigError("configuration needs a mode");
    read_object(j, "configuration", [&](const std::string& key, const json& v) {
      if (key == "version") {
      } else if (key == "mode") {
        c.mode = parse_run_mode(v.get<std::string>());
      } else if (key == "model") {
        v.get_to(c.model);
      } else if (key == "thinfilm") {
        read_object(v, "thinfilm", [&](const std::string& k, const json& x) {
          if (k == "alpha") {
            c.thinfilm.alpha = x.get<int>();
          } else if (k == "c") {
            c.thinfilm.c = x.get<double>();
          } else if (k == "mobility_scale") {
            c.thinfilm.mobility_scale = x.get<double>();
          } else if (k == "v_D") {
            c.thinfilm.v_D = x.get<double>();
          } else if (k == "drift_prefactor") {
            c.thinfilm.drift_prefactor = x.get<double>();
          } else if (k == "linearized") {
            c.thinfilm.linearized = x.get<bool>();
          } else if (k == "potential") {
            if (x.is_null()) {
              c.thinfilm.potential.reset();
              return true;
            }
            Potential pot;
            read_object(x, "thinfilm.potential", [&](const std::string& pk, const json& px) {
              if (pk == "kind") {
                const auto kind = px.get<std::string>();
                if (kind == "gravity") {
                  pot.kind = Potential::Kind::gravity;
                } else if (kind == "van_der_waals") {
                  pot.kind = Potential::Kind::van_der_waals;
                } else {
                  throw ConfigError("unknown potential '" + kind + "'");
                }
              } else if (pk == "coefficient") {
                pot.coefficient = px.get<double>();
              } else {
                return false;
              }
              return true;
            });
            c.thinfilm.potential = pot;
          } else {
            return false;
          }
          return true;
        });
      } else if (key == "ansatz") {
        if (v.is_null()) {
          c.ansatz.reset();
          return true;
        }
        AnsatzSettings a;
        read_object(v, "ansatz", [&](const std::string& k, const json& x) {
          if (k == "B_hat") {
            a.constants.B_hat = x.get<double>();
          } else if (k == "D_hat") {
            a.constants.D_hat = x.get<double>();
          } else if (k == "rho_s_hat") {
            a.constants.rho_s_hat = x.get<double>();
          } else if (k == "eps") {
            a.eps = x.get<double>();
          } else {
            return false;
          }
          return true;
        });
        c.ansatz = a;
      } else if (key == "initial") {
        read_object(v, "initial", [&](const std::string& k, const json& x) {
          if (k == "mean") {
            c.initial.mean = x.get<double>();
          } else if (k == "amplitude") {
            c.initial.amplitude = x.get<double>();
          } else if (k == "k") {
            c.initial.k = x.get<int>();
          } else if (k == "trig") {
            const auto trig = x.get<std::string>();
            if (trig != "sin" && trig != "cos") throw ConfigError("initial.trig must be sin or cos");
            c.initial.sine = trig == "sin";
          } else {
            return false;
          }
          return true;
        });
      } else if (key == "ladder") {
        read_object(v, "ladder", [&](const std::string& k, const json& x) {
          if (k != "eps") return false;
          c.eps = x.get<std::vector<double>>();
          return true;
        });
      } else if (key == "forcing") {
        v.get_to(c.forcing);
      } else if (key == "resolution") {
        read_object(v, "resolution", [&](const std::string& k, const json& x) {
          if (k == "n") {
            c.resolution.n = x.get<int>();
          } else if (k == "m") {
            c.resolution.m = x.get<int>();
          } else {
            return false;
          }
          return true;
        });
      } else if (key == "time") {
        read_object(v, "time", [&](const std::string& k, const json& x) {
          if (k == "dt") {
            c.time.dt = x.get<double>();
          } else if (k == "T_end") {
            c.time.T_end = x.get<double>();
          } else if (k == "steps") {
            c.time.steps = x.get<int>();
          } else if (k == "output_every") {
            c.time.output_every = x.get<int>();
          } else if (k == "samples") {
            c.time.samples = x.get<int>();
          } else if (k == "reduced_dt") {
            c.time.reduced_dt = x.get<double>();
          } else {
            return false;
          }
          return true;
        });
      } else if (key == "verify") {
        read_object(v, "verify", [&](const std::string& k, const json& x) {
          auto& t = c.thresholds;
          if (k == "refinement") {
            c.refinement = x.get<bool>();
          } else if (k == "velocity") {
            t.velocity = x.get<double>();
          } else if (k == "pressure") {
            t.pressure = x.get<double>();
          } else if (k == "displacement") {
            t.displacement = x.get<double>();
          } else if (k == "r2") {
            t.r2 = x.get<double>();
          } else if (k == "energy_spread") {
            t.energy_spread = x.get<double>();
          } else {
            return false;
          }
          return true;
        });
      } else if (key == "output_dir") {
        c.output_dir = v.get<std::string>();
      } else {
        return false;
      }
      return true;
    });
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

// ---------------------------------------------------------------------------
// presets

namespace {

struct PresetEntry {
  std::string description;
  std::function<ExperimentConfig()> build;
};

ExperimentConfig film_preset(int alpha, double mobility_scale, double dt, int steps) {
  ExperimentConfig c;
  c.mode = RunMode::thinfilm;
  c.thinfilm.alpha = alpha;
  c.thinfilm.c = 1.0;
  c.thinfilm.mobility_scale = mobility_scale;
  c.thinfilm.drift_prefactor = 6.0;
  c.resolution = {64, 16};
  c.time.dt = dt;
  c.time.steps = steps;
  c.time.output_every = 10;
  return c;
}

ExperimentConfig theorem_preset(Exponent kappa) {
  ExperimentConfig c;
  c.mode = RunMode::rates;
  c.model.kappa = kappa;
  c.model.tau = time_scale_exponent(kappa);
  c.model.theta = 0.01;
  c.model.dim = 1;
  c.eps = {0.125, 0.0625, 0.03125, 0.015625};
  c.forcing = single_harmonic_forcing(1.0, TimeRamp{TimeRamp::Kind::gaussian, 0.1});
  c.resolution = {32, 16};
  c.time.dt = 2e-6;
  c.time.T_end = 0.5;
  c.time.samples = 100;
  c.time.reduced_dt = 1e-5;
  return c;
}

const std::map<std::string, PresetEntry>& catalog() {
  static const std::map<std::string, PresetEntry> presets = {
      {"pm-paper",
       {"porous-medium film, alpha=1 with mobility_scale 4: d_t h = d_xx(h^4) - 6 d_x(h v_D)",
        [] { return film_preset(1, 4.0, 1e-4, 100); }}},
      {"tf-surface-tension",
       {"surface-tension film, alpha=3: d_t h = -d_x(h^3 d_xxx h) - 6 d_x(h v_D)",
        [] { return film_preset(3, 1.0, 1e-5, 100); }}},
      {"stf-bending",
       {"plate-covered film, alpha=5: d_t h = d_x(h^3 d_x^5 h) - 6 d_x(h v_D)",
        [] { return film_preset(5, 1.0, 1e-6, 100); }}},
      {"nonlinear-3.3",
       {"plate-covered film with drift v_D=1 and the moving-domain scalings B, D, rho_s, T at eps=1/8",
        [] {
          ExperimentConfig c = film_preset(5, 1.0, 1e-6, 100);
          c.thinfilm.v_D = 1.0;
          c.ansatz = AnsatzSettings{};
          return c;
        }}},
      {"theorem-e0-kappa1",
       {"rate study, kappa=1, tau=-2, eps=1/8..1/64", [] { return theorem_preset(Exponent(1)); }}},
      {"theorem-e0-kappa2",
       {"rate study, kappa=2, tau=-1, eps=1/8..1/64", [] { return theorem_preset(Exponent(2)); }}},
      {"theorem-e0-kappa2.5",
       {"rate study, kappa=5/2, tau=-1/2, eps=1/8..1/64", [] { return theorem_preset(Exponent(5, 2)); }}},
      {"fsi-channel",
       {"single FSI run, one horizontal direction, eps=1/8", [] {
          ExperimentConfig c;
          c.mode = RunMode::fsi;
          c.model.theta = 0.01;
          c.forcing = single_harmonic_forcing(1.0, TimeRamp{TimeRamp::Kind::gaussian, 0.02});
          c.resolution = {32, 16};
          c.time.dt = 1e-4;
          c.time.T_end = 0.1;
          c.time.output_every = 100;
          return c;
        }}},
      {"fsi-3d-smoke",
       {"single FSI run over a 2D plate, n=16, eps=1/8", [] {
          ExperimentConfig c;
          c.mode = RunMode::fsi;
          c.model.theta = 0.01;
          c.model.dim = 2;
          ForcingHarmonic f1;
          ForcingHarmonic f2;
          f2.component = 1;
          f2.k = {1, 1};
          f2.amplitude = 0.5;
          f2.sine = false;
          c.forcing = Forcing({f1, f2}, TimeRamp{TimeRamp::Kind::gaussian, 0.02});
          c.resolution = {16, 16};
          c.time.dt = 1e-4;
          c.time.T_end = 0.1;
          c.time.output_every = 100;
          return c;
        }}},
      {"reynolds-sine",
       {"stationary pressure under h = 1 + 0.5 sin(2 pi x), v_D = 1", [] {
          ExperimentConfig c;
          c.mode = RunMode::reynolds;
          c.model.v_D = 1.0;
          c.initial = {1.0, 0.5, 1, true};
          c.resolution = {256, 16};
          return c;
        }}},
  };
  return presets;
}

}  // namespace

std::vector<PresetInfo> list_presets() {
  std::vector<PresetInfo> out;
  for (const auto& [id, entry] : catalog()) out.push_back({id, entry.description});
  return out;
}

ExperimentConfig preset_config(const std::string& id) {
  const auto it = catalog().find(id);
  if (it == catalog().end()) throw NotFound("unknown preset '" + id + "'");
  return it->second.build();
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  if (!doc.contains("preset")) return doc.get<ExperimentConfig>();
  if (!doc.at("preset").is_string()) throw ConfigError("preset must be a string");
  json merged = preset_config(doc.at("preset").get<std::string>());
  json patch = doc;
  patch.erase("preset");
  // a new κ without an explicit τ re-derives τ = κ - 3
  if (patch.contains("model") && patch["model"].is_object() && patch["model"].contains("kappa") &&
      !patch["model"].contains("tau")) {
    merged["model"].erase("tau");
  }
  merged.merge_patch(patch);
  return merged.get<ExperimentConfig>();
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in '" + path + "': " + e.what());
  }
  return parse_config(doc);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(md[i]);
  return os.str();
}

std::string config_hash(const ExperimentConfig& c) {
  json j = c;
  j.erase("output_dir");
  return sha256_hex(j.dump());
}

// ---------------------------------------------------------------------------
// runners

namespace {

class ArtifactWriter {
 public:
  ArtifactWriter(fs::path dir, const ExperimentConfig& config) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
    manifest_ = {{"mode", to_string(config.mode)}, {"config_sha256", config_hash(config)}, {"files", json::array()}};
  }

  void write(const std::string& name, const std::string& content) {
    put(name, content);
    manifest_["files"].push_back({{"name", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
  }

  json finish(int exit_code) {
    manifest_["exit_code"] = exit_code;
    put("manifest.json", manifest_.dump(2) + "\n");
    return manifest_;
  }

 private:
  void put(const std::string& name, const std::string& content) {
    const fs::path target = dir_ / name;
    const fs::path tmp = dir_ / ("." + name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << content;
      if (!out) throw Error("cannot write " + tmp.string());
    }
    fs::rename(tmp, target);
  }

  fs::path dir_;
  json manifest_;
};

std::ostringstream csv_stream() {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17);
  return os;
}

int run_thinfilm(const ExperimentConfig& c, ArtifactWriter& out) {
  const ThinFilmModel& model = c.thinfilm;
  const PeriodicGrid grid(1, c.resolution.n);
  FilmState s{c.initial.sample(grid), 0.0};
  const double mass0 = mean_value(s.eta);
  double drift = 0.0;
  double min_eta = s.eta.min();
  double energy_rise = 0.0;
  double energy = film_energy(model, s.eta);
  json series = json::array({json::array({0.0, energy})});

  auto traj = csv_stream();
  traj << "t,x1,eta\n";
  auto record = [&] {
    for (std::size_t i = 0; i < s.eta.size(); ++i) traj << s.t << ',' << grid.coordinate(i)[0] << ',' << s.eta[i] << '\n';
  };
  record();
  for (int n = 1; n <= c.time.steps; ++n) {
    s = step(model, s, c.time.dt);
    drift = std::max(drift, std::abs(mean_value(s.eta) - mass0) / (1.0 + std::abs(mass0)));
    min_eta = std::min(min_eta, s.eta.min());
    const double e = film_energy(model, s.eta);
    energy_rise = std::max(energy_rise, e - energy);
    energy = e;
    if (n % c.time.output_every == 0 || n == c.time.steps) {
      record();
      series.push_back({s.t, e});
    }
  }
  spdlog::info("thin film: {} steps to t = {}, mass drift {:.3e}, min eta {:.6f}", c.time.steps, s.t, drift, min_eta);

  json summary = {{"steps", c.time.steps},
                  {"t_end", s.t},
                  {"mass", mass0},
                  {"mass_drift", drift},
                  {"min_eta", min_eta},
                  {"max_energy_increase", energy_rise},
                  {"energy", series}};
  if (c.ansatz) {
    const auto& a = c.ansatz->constants;
    const double e = c.ansatz->eps;
    summary["ansatz"] = {{"eps", e},
                         {"B", a.rigidity(e)},
                         {"D", a.viscoelasticity(e)},
                         {"rho_s", a.plate_density(e)},
                         {"T", a.time_scale(e)},
                         {"energy_bound_exponent", NonlinearScalingPreset::energy_bound_exponent},
                         {"displacement_bound_exponent", NonlinearScalingPreset::displacement_bound_exponent}};
  }
  out.write("trajectory.csv", traj.str());
  out.write("summary.json", summary.dump(2) + "\n");
  return 0;
}

int run_fsi_mode(const ExperimentConfig& c, ArtifactWriter& out) {
  const FsiParams params = c.fsi_params();
  const FsiRun run = run_fsi(params, c.time.T_end, c.time.output_every);
  const EnergyAudit audit = energy_audit(run.ledger);
  const int dim = params.grid.dim;
  const auto& y = params.vnodes->nodes();

  auto eta = csv_stream(), vel = csv_stream(), pre = csv_stream();
  const std::string xcols = dim == 1 ? "x1," : "x1,x2,";
  eta << "t," << xcols << "eta,eta_t\n";
  vel << "t,component," << xcols << "y,v\n";
  pre << "t," << xcols << "y,p\n";
  auto coords = [&](std::ostringstream& os, std::size_t h) {
    const auto x = params.grid.coordinate(h);
    os << x[0] << ',';
    if (dim == 2) os << x[1] << ',';
  };
  for (const auto& s : run.snapshots) {
    for (std::size_t h = 0; h < params.grid.size(); ++h) {
      eta << s.t << ',';
      coords(eta, h);
      eta << s.eta[h] << ',' << s.eta_t[h] << '\n';
    }
    for (std::size_t a = 0; a < s.v.size(); ++a) {
      for (int j = 0; j < s.v[a].levels(); ++j) {
        for (std::size_t h = 0; h < params.grid.size(); ++h) {
          vel << s.t << ',' << a + 1 << ',';
          coords(vel, h);
          vel << y[j] << ',' << s.v[a].at(j, h) << '\n';
        }
      }
    }
    for (int j = 0; j < s.p.levels(); ++j) {
      for (std::size_t h = 0; h < params.grid.size(); ++h) {
        pre << s.t << ',';
        coords(pre, h);
        pre << y[j] << ',' << s.p.at(j, h) << '\n';
      }
    }
  }

  auto ledger = csv_stream();
  ledger << "step,t,kinetic_fluid,kinetic_plate,bending,viscous,viscoelastic,work,numerical,"
            "cum_viscous,cum_viscoelastic,cum_work,cum_numerical\n";
  for (const auto& e : run.ledger.entries) {
    ledger << e.step << ',' << e.t << ',' << e.kinetic_fluid << ',' << e.kinetic_plate << ',' << e.bending << ','
           << e.viscous << ',' << e.viscoelastic << ',' << e.work << ',' << e.numerical << ',' << e.cum_viscous << ','
           << e.cum_viscoelastic << ',' << e.cum_work << ',' << e.cum_numerical << '\n';
  }

  const auto& last = run.ledger.entries.back();
  const json summary = {
      {"model", params.model},
      {"grid", {{"dim", dim}, {"n", params.grid.n}, {"m", params.vnodes->size()}}},
      {"steps", last.step},
      {"dt", last.step > 0 ? last.t / last.step : 0.0},
      {"t_end", last.t},
      {"time_scale", run.ledger.time_scale},
      {"regime", {{"pass", run.regime.pass}, {"warn", run.regime.warn}, {"reason", run.regime.reason}}},
      {"diagnostics",
       {{"divergence_ratio", run.worst.divergence_ratio},
        {"top_horizontal", run.worst.top_horizontal},
        {"kinematic", run.worst.kinematic},
        {"eta_mean", run.worst.eta_mean}}},
      {"audit", {{"worst_slack", audit.worst_slack}, {"terminal_ratio", audit.terminal_ratio}}},
      {"final_energy", last.total_energy()}};
  spdlog::info("fsi: {} steps, terminal energy ratio {:.6e}, worst slack {:.3e}", last.step, audit.terminal_ratio,
               audit.worst_slack);

  out.write("eta.csv", eta.str());
  out.write("velocity.csv", vel.str());
  out.write("pressure.csv", pre.str());
  out.write("energy_ledger.csv", ledger.str());
  out.write("summary.json", summary.dump(2) + "\n");
  return 0;
}

int run_rates(const ExperimentConfig& c, const RunOptions& opts, ArtifactWriter& out) {
  const RateStudy study = run_rate_study(c.ladder(), opts.jobs, [](const std::string& m) { spdlog::info("{}", m); });
  const bool refinement_ok = !study.refinement.ran || study.refinement.pass;
  const bool pass = study.rates_pass && study.energy_pass && refinement_ok;
  const auto& t = c.thresholds;
  json rates = study;
  rates["thresholds"] = {{"velocity", t.velocity},
                         {"pressure", t.pressure},
                         {"displacement", t.displacement},
                         {"r2", t.r2},
                         {"energy_spread", t.energy_spread}};
  rates["pass"] = pass;
  spdlog::info("rates: velocity {:.3f} pressure {:.3f} displacement {:.3f} -> {}", study.velocity.slope,
               study.pressure.slope, study.displacement.slope, pass ? "pass" : "fail");

  auto csv = csv_stream();
  write_reports_csv(csv, study.reports);
  out.write("reports.csv", csv.str());
  out.write("rates.json", rates.dump(2) + "\n");
  return pass ? 0 : 1;
}

int run_reynolds(const ExperimentConfig& c, ArtifactWriter& out) {
  const PeriodicGrid grid(1, c.resolution.n);
  const PeriodicField eta = c.initial.sample(grid);
  const PeriodicField p = solve_reynolds_stationary(eta, c.model.v_D, c.model.nu);
  auto csv = csv_stream();
  csv << "x1,eta,p\n";
  for (std::size_t i = 0; i < grid.size(); ++i) csv << grid.coordinate(i)[0] << ',' << eta[i] << ',' << p[i] << '\n';
  const json summary = {{"n", grid.n},
                        {"v_D", c.model.v_D},
                        {"nu", c.model.nu},
                        {"p_min", p.min()},
                        {"p_max", p.max()},
                        {"p_l2", l2_norm(p)}};
  out.write("pressure.csv", csv.str());
  out.write("summary.json", summary.dump(2) + "\n");
  return 0;
}

json breakdown_report(const char* kind, const std::exception& e) {
  json j = {{"error", kind}, {"message", e.what()}};
  if (const auto* a = dynamic_cast<const AuditFailure*>(&e)) j["step"] = a->step();
  if (const auto* f = dynamic_cast<const FilmBreakdown*>(&e)) {
    j["last_t"] = f->last_valid().t;
    j["last_min_eta"] = f->last_valid().eta.min();
  }
  return j;
}

}  // namespace

RunOutcome run(const ExperimentConfig& config, const RunOptions& options) {
  RunOutcome outcome;
  try {
    config.validate();
    if (options.jobs < 1) throw ConfigError("jobs must be at least 1");
  } catch (const ConfigError& e) {
    outcome.exit_code = 2;
    outcome.message = e.what();
    return outcome;
  }

  ArtifactWriter out(config.output_dir, config);
  spdlog::info("{} run, config {}", to_string(config.mode), config_hash(config));
  try {
    switch (config.mode) {
      case RunMode::thinfilm: outcome.exit_code = run_thinfilm(config, out); break;
      case RunMode::fsi: outcome.exit_code = run_fsi_mode(config, out); break;
      case RunMode::rates: outcome.exit_code = run_rates(config, options, out); break;
      case RunMode::reynolds: outcome.exit_code = run_reynolds(config, out); break;
    }
    if (outcome.exit_code == 1) outcome.message = "verification checks failed";
  } catch (const AuditFailure& e) {
    outcome = {3, e.what(), {}};
    out.write("breakdown.json", breakdown_report("audit_failure", e).dump(2) + "\n");
  } catch (const Breakdown& e) {
    outcome = {3, e.what(), {}};
    out.write("breakdown.json", breakdown_report("breakdown", e).dump(2) + "\n");
  } catch (const PositivityViolation& e) {
    outcome = {3, e.what(), {}};
    out.write("breakdown.json", breakdown_report("positivity", e).dump(2) + "\n");
  } catch (const AssemblyError& e) {
    outcome = {3, e.what(), {}};
    out.write("breakdown.json", breakdown_report("assembly", e).dump(2) + "\n");
  }
  outcome.manifest = out.finish(outcome.exit_code);
  return outcome;
}

}  // namespace lubelastic
