#pragma once

// Configuration ingestion: JSON document -> ValidatedModel.
//
// Sections: material, grid, environment, stress, nv, protocol, and the
// optional transducer and run sections. Scalars are either plain numbers
// (SI) or strings with a unit ("2350 G", "3.75 nm", "0.2 MPa").
// NVPIEZO_SEED in the environment overrides environment.seed.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvpiezo/core/error.hpp"
#include "nvpiezo/core/model.hpp"
#include "nvpiezo/core/units.hpp"
#include "nvpiezo/noise/types.hpp"
#include "nvpiezo/transduce/types.hpp"

namespace nvpiezo {

using json = nlohmann::json;

/// Knobs of the simulation drivers (not physics).
struct RunControls {
  double relax_tol = 1e-5;            // max |m×H|/|H| for deterministic convergence
  long max_steps = 200000;
  double init_perturbation = 0.01;    // amplitude of the seeded initial tilt
  double equilibration_time = 1e-9;   // s, thermal runs
  double averaging_time = 20e-9;      // s, thermal averages in stress sweeps
  double sample_interval = 10e-12;    // s, stray-field sampling
  double noise_duration = 20e-9;      // s per seed
  int n_seeds = 8;
  double max_lag = 0.0;               // s; 0 selects 5/xi_guess

  friend bool operator==(const RunControls&, const RunControls&) = default;
};

/// Literal inputs that let `sensitivity` and `force-trace` run without the
/// micromagnetic stages.
struct SensingInputs {
  std::optional<noise::NoiseFit> noise_fit;
  std::optional<double> dDelta_dsigma;    // Hz/Pa
  std::optional<double> Delta0;           // Hz at zero stress
  std::optional<double> omega_minus1;     // Hz, transition frequency used for S_perp

  friend bool operator==(const SensingInputs&, const SensingInputs&) = default;
};

struct ValidatedModel {
  MaterialParams material;
  Grid grid;
  Environment environment;
  StressLoad stress;
  NVConfig nv;
  SensingProtocol protocol;
  SensingInputs sensing;
  transduce::TransducerConstants transducer;
  RunControls run;
  std::vector<std::string> warnings;

  /// Equality of the physical model; warnings are not part of it.
  friend bool operator==(const ValidatedModel& a, const ValidatedModel& b) {
    return a.material == b.material && a.grid == b.grid && a.environment == b.environment &&
           a.stress == b.stress && a.nv == b.nv && a.protocol == b.protocol && a.sensing == b.sensing &&
           a.transducer == b.transducer && a.run == b.run;
  }
};

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(const json& root) : root_(root) {}

  const json* section(const char* name) const {
    if (!root_.is_object()) return nullptr;
    auto it = root_.find(name);
    if (it == root_.end()) return nullptr;
    return &*it;
  }

  void require_object(const json* node, const std::string& path, bool required) {
    if (!node) {
      if (required) problem(path, "section is missing");
      return;
    }
    if (!node->is_object()) problem(path, "must be an object");
  }

  /// Reads a scalar if present; returns fallback otherwise.
  double quantity(const json* sec, const std::string& sec_path, const char* key, units::Dimension dim,
                  double fallback) {
    if (!sec || !sec->is_object()) return fallback;
    auto it = sec->find(key);
    if (it == sec->end()) return fallback;
    return parse_scalar(*it, sec_path + "." + key, dim, fallback);
  }

  std::optional<double> optional_quantity(const json* sec, const std::string& sec_path, const char* key,
                                          units::Dimension dim) {
    if (!sec || !sec->is_object()) return std::nullopt;
    auto it = sec->find(key);
    if (it == sec->end() || it->is_null()) return std::nullopt;
    return parse_scalar(*it, sec_path + "." + key, dim, 0.0);
  }

  std::optional<Vec3> vector(const json* sec, const std::string& sec_path, const char* key, units::Dimension dim) {
    if (!sec || !sec->is_object()) return std::nullopt;
    auto it = sec->find(key);
    if (it == sec->end() || it->is_null()) return std::nullopt;
    const std::string path = sec_path + "." + key;
    if (!it->is_array() || it->size() != 3) {
      problem(path, "must be an array of three values");
      return std::nullopt;
    }
    Vec3 v;
    for (int c = 0; c < 3; ++c) v[c] = parse_scalar((*it)[static_cast<std::size_t>(c)], path + "[" + std::to_string(c) + "]", dim, 0.0);
    return v;
  }

  long integer(const json* sec, const std::string& sec_path, const char* key, long fallback) {
    if (!sec || !sec->is_object()) return fallback;
    auto it = sec->find(key);
    if (it == sec->end()) return fallback;
    if (!it->is_number_integer() && !it->is_number_unsigned()) {
      problem(sec_path + "." + key, "must be an integer");
      return fallback;
    }
    return it->get<long>();
  }

  std::optional<std::uint64_t> unsigned64(const json* sec, const std::string& sec_path, const char* key) {
    if (!sec || !sec->is_object()) return std::nullopt;
    auto it = sec->find(key);
    if (it == sec->end()) return std::nullopt;
    if (it->is_number_unsigned() || (it->is_number_integer() && it->get<long long>() >= 0))
      return it->get<std::uint64_t>();
    problem(sec_path + "." + key, "must be a non-negative integer");
    return std::nullopt;
  }

  void problem(const std::string& path, const std::string& what) { problems_.push_back(path + ": " + what); }
  void warn(const std::string& path, const std::string& what) { warnings_.push_back(path + ": " + what); }

  std::vector<std::string>& problems() { return problems_; }
  std::vector<std::string>& warnings() { return warnings_; }

 private:
  double parse_scalar(const json& v, const std::string& path, units::Dimension dim, double fallback) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      try {
        return units::parse_quantity(v.get<std::string>(), dim);
      } catch (const Error& e) {
        problem(path, e.what());
        return fallback;
      }
    }
    problem(path, "must be a number or a quantity string");
    return fallback;
  }

  const json& root_;
  std::vector<std::string> problems_;
  std::vector<std::string> warnings_;
};

inline Vec3 normalize_direction(ConfigReader& r, const std::string& path, const Vec3& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n == 0.0) {
    r.problem(path, "direction vector must be non-zero and finite");
    return Vec3::UnitZ();
  }
  if (std::abs(n - 1.0) > 1e-12) {
    r.warn(path, "direction normalized to unit length");
    return v / n;
  }
  return v;
}

inline std::optional<noise::NoiseFit> read_noise_fit(ConfigReader& r, const json* sec, const std::string& path) {
  if (!sec || !sec->is_object()) return std::nullopt;
  auto it = sec->find("noise_fit");
  if (it == sec->end() || it->is_null()) return std::nullopt;
  const std::string p = path + ".noise_fit";
  if (!it->is_object()) {
    r.problem(p, "must be an object with x, y, z components");
    return std::nullopt;
  }
  noise::NoiseFit fit;
  fit.n_seeds = static_cast<int>(r.integer(&*it, p, "n_seeds", 1));
  static constexpr const char* names[3] = {"x", "y", "z"};
  for (std::size_t c = 0; c < 3; ++c) {
    auto ct = it->find(names[c]);
    const std::string cp = p + "." + names[c];
    if (ct == it->end() || !ct->is_object()) {
      r.problem(cp, "component is missing");
      continue;
    }
    auto& d = fit.component[c];
    d.R0 = r.quantity(&*ct, cp, "R0", units::Dimension::dimensionless, 0.0);
    d.xi = r.quantity(&*ct, cp, "xi", units::Dimension::frequency, 1.0);
    d.omega0 = r.quantity(&*ct, cp, "omega0", units::Dimension::frequency, 0.0);
    d.residual = r.quantity(&*ct, cp, "residual", units::Dimension::dimensionless, 0.0);
    if (!(d.R0 >= 0.0)) r.problem(cp + ".R0", "must be >= 0");
    if (!(d.xi > 0.0)) r.problem(cp + ".xi", "must be > 0");
    if (!(d.omega0 >= 0.0)) r.problem(cp + ".omega0", "must be >= 0");
  }
  return fit;
}

}  // namespace detail

/// Check every invariant of the configuration and convert to SI.
/// Throws ConfigError listing all violations; non-fatal issues end up in
/// ValidatedModel::warnings.
inline ValidatedModel validate_config(const json& raw) {
  using units::Dimension;
  detail::ConfigReader r(raw);
  ValidatedModel m;
  if (!raw.is_object()) throw ConfigError({"$: configuration must be a JSON object"});

  // material
  const json* mat = r.section("material");
  r.require_object(mat, "material", false);
  m.material = builtin_terfenol_d();
  if (mat && mat->is_object()) {
    auto preset = mat->find("preset");
    if (preset != mat->end()) {
      if (!preset->is_string() || (preset->get<std::string>() != "terfenol-d" && preset->get<std::string>() != "none"))
        r.problem("material.preset", "unknown preset (known: terfenol-d, none)");
      else if (preset->get<std::string>() == "none")
        m.material = MaterialParams{};
    }
  }
  auto& p = m.material;
  p.Ms = r.quantity(mat, "material", "Ms", Dimension::magnetization, p.Ms);
  p.A_ex = r.quantity(mat, "material", "A_ex", Dimension::exchange, p.A_ex);
  p.K1 = r.quantity(mat, "material", "K1", Dimension::energy_density, p.K1);
  p.K2 = r.quantity(mat, "material", "K2", Dimension::energy_density, p.K2);
  p.lambda100 = r.quantity(mat, "material", "lambda100", Dimension::dimensionless, p.lambda100);
  p.lambda111 = r.quantity(mat, "material", "lambda111", Dimension::dimensionless, p.lambda111);
  p.alpha = r.quantity(mat, "material", "alpha", Dimension::dimensionless, p.alpha);
  p.gamma = r.quantity(mat, "material", "gamma", Dimension::dimensionless, p.gamma);
  if (!(p.Ms > 0.0)) r.problem("material.Ms", "must be > 0");
  if (!(p.A_ex > 0.0)) r.problem("material.A_ex", "must be > 0");
  if (!(p.alpha >= 0.0)) r.problem("material.alpha", "must be >= 0");
  if (!(p.gamma > 0.0)) r.problem("material.gamma", "must be > 0");
  if (p.Ms > 0.0 && p.A_ex > 0.0 && !std::isfinite(p.exchange_length()))
    r.problem("material", "exchange length is not finite");

  // grid
  const json* grid = r.section("grid");
  r.require_object(grid, "grid", true);
  m.grid.nx = static_cast<int>(r.integer(grid, "grid", "nx", 4));
  m.grid.ny = static_cast<int>(r.integer(grid, "grid", "ny", 4));
  m.grid.nz = static_cast<int>(r.integer(grid, "grid", "nz", 4));
  m.grid.dx = r.quantity(grid, "grid", "dx", Dimension::length, 3.75e-9);
  if (m.grid.nx < 1) r.problem("grid.nx", "must be >= 1");
  if (m.grid.ny < 1) r.problem("grid.ny", "must be >= 1");
  if (m.grid.nz < 1) r.problem("grid.nz", "must be >= 1");
  if (!(m.grid.dx > 0.0)) r.problem("grid.dx", "must be > 0");
  if (m.grid.dx > 0.0 && p.Ms > 0.0 && p.A_ex > 0.0 && m.grid.dx > p.exchange_length())
    r.warn("grid.dx", "cell size exceeds the exchange length of the material");

  // environment
  const json* env = r.section("environment");
  r.require_object(env, "environment", true);
  if (auto h = r.vector(env, "environment", "applied_field", Dimension::magnetic_h)) m.environment.H_ext = *h;
  m.environment.temperature = r.quantity(env, "environment", "temperature", Dimension::temperature, 0.0);
  m.environment.dt = r.quantity(env, "environment", "dt", Dimension::time, 1e-13);
  if (auto s = r.unsigned64(env, "environment", "seed")) m.environment.seed = *s;
  if (const char* s = std::getenv("NVPIEZO_SEED"); s && *s) {
    char* end = nullptr;
    const auto v = std::strtoull(s, &end, 10);
    if (end && *end == '\0')
      m.environment.seed = v;
    else
      r.problem("env:NVPIEZO_SEED", "must be an unsigned integer");
  }
  if (!(m.environment.temperature >= 0.0)) r.problem("environment.temperature", "must be >= 0");
  if (!(m.environment.dt > 0.0)) r.problem("environment.dt", "must be > 0");
  if (!m.environment.H_ext.allFinite()) r.problem("environment.applied_field", "must be finite");
  if (m.environment.temperature > 0.0 && p.alpha == 0.0)
    r.problem("material.alpha", "thermal runs (temperature > 0) need alpha > 0");

  // stress
  const json* st = r.section("stress");
  r.require_object(st, "stress", false);
  m.stress.sigma = r.quantity(st, "stress", "sigma", Dimension::stress, 0.0);
  if (auto d = r.vector(st, "stress", "direction", Dimension::dimensionless))
    m.stress.theta = detail::normalize_direction(r, "stress.direction", *d);
  else
    m.stress.theta = Vec3(1.0, 1.0, 1.0).normalized();
  if (!std::isfinite(m.stress.sigma)) r.problem("stress.sigma", "must be finite");

  // nv
  const json* nv = r.section("nv");
  r.require_object(nv, "nv", false);
  m.nv.D = r.quantity(nv, "nv", "D", Dimension::frequency, m.nv.D);
  m.nv.E_strain = r.quantity(nv, "nv", "E_strain", Dimension::frequency, 0.0);
  m.nv.depth = r.quantity(nv, "nv", "depth", Dimension::length, m.nv.depth);
  m.nv.position = r.vector(nv, "nv", "position", Dimension::length);
  if (auto a = r.vector(nv, "nv", "axis", Dimension::dimensionless)) m.nv.axis = detail::normalize_direction(r, "nv.axis", *a);
  if (!(m.nv.D > 0.0)) r.problem("nv.D", "must be > 0");
  if (!(m.nv.depth >= 0.0)) r.problem("nv.depth", "must be >= 0");

  // protocol
  const json* pr = r.section("protocol");
  r.require_object(pr, "protocol", false);
  m.protocol.contrast = r.quantity(pr, "protocol", "contrast", Dimension::dimensionless, m.protocol.contrast);
  m.protocol.t_prep = r.quantity(pr, "protocol", "t_prep", Dimension::time, m.protocol.t_prep);
  m.protocol.t_a = r.quantity(pr, "protocol", "t_a", Dimension::time, m.protocol.t_a);
  m.protocol.tau = r.quantity(pr, "protocol", "tau", Dimension::time, m.protocol.tau);
  if (!(m.protocol.contrast > 0.0 && m.protocol.contrast <= 1.0)) r.problem("protocol.contrast", "must lie in (0, 1]");
  if (!(m.protocol.t_prep > 0.0)) r.problem("protocol.t_prep", "must be > 0");
  if (!(m.protocol.t_a > 0.0)) r.problem("protocol.t_a", "must be > 0");
  if (!(m.protocol.tau > 0.0)) r.problem("protocol.tau", "must be > 0");
  m.sensing.noise_fit = detail::read_noise_fit(r, pr, "protocol");
  m.sensing.dDelta_dsigma = r.optional_quantity(pr, "protocol", "dDelta_dsigma", Dimension::dimensionless);
  m.sensing.Delta0 = r.optional_quantity(pr, "protocol", "Delta0", Dimension::frequency);
  m.sensing.omega_minus1 = r.optional_quantity(pr, "protocol", "omega_minus1", Dimension::frequency);

  // transducer
  const json* tr = r.section("transducer");
  r.require_object(tr, "transducer", false);
  auto& tc = m.transducer;
  tc.epsilon_e = r.quantity(tr, "transducer", "epsilon_e", Dimension::dimensionless, tc.epsilon_e);
  tc.Y_piezo = r.quantity(tr, "transducer", "Y_piezo", Dimension::stress, tc.Y_piezo);
  tc.epsilon_T = r.quantity(tr, "transducer", "epsilon_T", Dimension::dimensionless, tc.epsilon_T);
  tc.Y_thermal = r.quantity(tr, "transducer", "Y_thermal", Dimension::stress, tc.Y_thermal);
  tc.contact_area = r.quantity(tr, "transducer", "contact_area", Dimension::dimensionless,
                               m.grid.extent().x() * m.grid.extent().y());
  if (!(tc.epsilon_e > 0.0)) r.problem("transducer.epsilon_e", "must be > 0");
  if (!(tc.Y_piezo > 0.0)) r.problem("transducer.Y_piezo", "must be > 0");
  if (!(tc.epsilon_T > 0.0)) r.problem("transducer.epsilon_T", "must be > 0");
  if (!(tc.Y_thermal > 0.0)) r.problem("transducer.Y_thermal", "must be > 0");
  if (!(tc.contact_area > 0.0)) r.problem("transducer.contact_area", "must be > 0");

  // run
  const json* run = r.section("run");
  r.require_object(run, "run", false);
  auto& rc = m.run;
  rc.relax_tol = r.quantity(run, "run", "relax_tol", Dimension::dimensionless, rc.relax_tol);
  rc.max_steps = r.integer(run, "run", "max_steps", rc.max_steps);
  rc.init_perturbation = r.quantity(run, "run", "init_perturbation", Dimension::dimensionless, rc.init_perturbation);
  rc.equilibration_time = r.quantity(run, "run", "equilibration_time", Dimension::time, rc.equilibration_time);
  rc.averaging_time = r.quantity(run, "run", "averaging_time", Dimension::time, rc.averaging_time);
  rc.sample_interval = r.quantity(run, "run", "sample_interval", Dimension::time, rc.sample_interval);
  rc.noise_duration = r.quantity(run, "run", "noise_duration", Dimension::time, rc.noise_duration);
  rc.n_seeds = static_cast<int>(r.integer(run, "run", "n_seeds", rc.n_seeds));
  rc.max_lag = r.quantity(run, "run", "max_lag", Dimension::time, rc.max_lag);
  if (!(rc.relax_tol > 0.0)) r.problem("run.relax_tol", "must be > 0");
  if (rc.max_steps < 1) r.problem("run.max_steps", "must be >= 1");
  if (!(rc.init_perturbation >= 0.0)) r.problem("run.init_perturbation", "must be >= 0");
  if (!(rc.equilibration_time >= 0.0)) r.problem("run.equilibration_time", "must be >= 0");
  if (!(rc.averaging_time > 0.0)) r.problem("run.averaging_time", "must be > 0");
  if (!(rc.sample_interval >= m.environment.dt)) r.problem("run.sample_interval", "must be >= environment.dt");
  if (!(rc.noise_duration > 0.0)) r.problem("run.noise_duration", "must be > 0");
  if (rc.n_seeds < 1) r.problem("run.n_seeds", "must be >= 1");
  if (!(rc.max_lag >= 0.0)) r.problem("run.max_lag", "must be >= 0");

  if (!r.problems().empty()) throw ConfigError(std::move(r.problems()));
  m.warnings = std::move(r.warnings());
  return m;
}

namespace detail {

inline json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace detail

/// Canonical SI serialization. validate_config(serialize(m)) == m.
inline json serialize(const ValidatedModel& m) {
  json j;
  const auto& p = m.material;
  j["material"] = {{"preset", "none"}, {"Ms", p.Ms}, {"A_ex", p.A_ex}, {"K1", p.K1}, {"K2", p.K2},
                   {"lambda100", p.lambda100}, {"lambda111", p.lambda111}, {"alpha", p.alpha}, {"gamma", p.gamma}};
  j["grid"] = {{"nx", m.grid.nx}, {"ny", m.grid.ny}, {"nz", m.grid.nz}, {"dx", m.grid.dx}};
  j["environment"] = {{"applied_field", detail::vec_json(m.environment.H_ext)},
                      {"temperature", m.environment.temperature},
                      {"dt", m.environment.dt},
                      {"seed", m.environment.seed}};
  j["stress"] = {{"sigma", m.stress.sigma}, {"direction", detail::vec_json(m.stress.theta)}};
  j["nv"] = {{"D", m.nv.D}, {"E_strain", m.nv.E_strain}, {"depth", m.nv.depth}, {"axis", detail::vec_json(m.nv.axis)}};
  if (m.nv.position) j["nv"]["position"] = detail::vec_json(*m.nv.position);
  j["protocol"] = {{"contrast", m.protocol.contrast}, {"t_prep", m.protocol.t_prep}, {"t_a", m.protocol.t_a},
                   {"tau", m.protocol.tau}};
  if (m.sensing.noise_fit) {
    json nf = {{"n_seeds", m.sensing.noise_fit->n_seeds}};
    static constexpr const char* names[3] = {"x", "y", "z"};
    for (std::size_t c = 0; c < 3; ++c) {
      const auto& d = m.sensing.noise_fit->component[c];
      nf[names[c]] = {{"R0", d.R0}, {"xi", d.xi}, {"omega0", d.omega0}, {"residual", d.residual}};
    }
    j["protocol"]["noise_fit"] = nf;
  }
  if (m.sensing.dDelta_dsigma) j["protocol"]["dDelta_dsigma"] = *m.sensing.dDelta_dsigma;
  if (m.sensing.Delta0) j["protocol"]["Delta0"] = *m.sensing.Delta0;
  if (m.sensing.omega_minus1) j["protocol"]["omega_minus1"] = *m.sensing.omega_minus1;
  const auto& t = m.transducer;
  j["transducer"] = {{"epsilon_e", t.epsilon_e}, {"Y_piezo", t.Y_piezo}, {"epsilon_T", t.epsilon_T},
                     {"Y_thermal", t.Y_thermal}, {"contact_area", t.contact_area}};
  const auto& r = m.run;
  j["run"] = {{"relax_tol", r.relax_tol},
              {"max_steps", r.max_steps},
              {"init_perturbation", r.init_perturbation},
              {"equilibration_time", r.equilibration_time},
              {"averaging_time", r.averaging_time},
              {"sample_interval", r.sample_interval},
              {"noise_duration", r.noise_duration},
              {"n_seeds", r.n_seeds},
              {"max_lag", r.max_lag}};
  return j;
}

}  // namespace nvpiezo
