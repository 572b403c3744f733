#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zkroa/dictionary.hpp"
#include "zkroa/systems.hpp"
#include "zkroa/types.hpp"

namespace zkroa {

using Json = nlohmann::json;

// Full description of one pipeline run. Every field has a documented default;
// the fully defaulted config reproduces the reduced-scale cubic 1D study.
// Precedence: CLI flags > config file > defaults.
struct RunConfig {
  // system
  std::string system_id = "cubic1d";
  SystemOverrides system_overrides;

  // trajectory generation
  double dt = 1.0;
  int nsteps = 1001;

  // sampling
  std::string sampling_mode = "grid";        // grid | random
  std::vector<int> samples_per_axis;         // grid mode; default 501 (1D), 60 per axis otherwise
  long random_count = 1000;                  // random mode
  std::uint64_t random_seed = 1;

  // dictionary
  std::optional<DictFamily> dict_family;     // default: cos_gauss_1d / cos_gauss_nd by dim
  int freq_count = 64;
  std::optional<double> period_scale;        // default: widest region axis
  double gauss_scale = 4.0;

  // operator fit
  double svd_tol = 1e-12;

  // iteration
  double iter_tol = 1e-2;
  int max_iterations = 10;
  std::string iter_mode = "matrix";          // matrix | vector

  // roa extraction / verification
  std::vector<int> roa_resolution;           // default 3000 (1D), 241 per axis (2D), 41 (3D+)
  double threshold = 0.001;
  double floor = 1e-6;
  double exclusion_radius = 0.1;
  double lie_margin = 0.0;

  // smooth regressor stage
  bool smooth_enabled = false;
  std::vector<int> smooth_widths = {15, 15};
  int smooth_epochs = 300;
  double smooth_mse_tol = 1e-8;
  std::uint64_t smooth_seed = 1;
  double smooth_learning_rate = 1e-2;
  double smooth_momentum = 0.9;
  std::vector<int> smooth_samples_per_axis;  // default 101 (1D), 61 per axis otherwise

  // diagnostics / output
  int spectrum_top_k = 0;
  std::string output_dir = "out";
  int workers = 0;                           // 0: ZKROA_WORKERS env or hardware
};

namespace detail {
template <typename T>
void maybe(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}
}  // namespace detail

inline RunConfig config_from_json(const Json& j) {
  RunConfig c;
  if (j.contains("system")) {
    const Json& s = j.at("system");
    detail::maybe(s, "id", c.system_id);
    if (s.contains("mu")) c.system_overrides.mu = s.at("mu").get<double>();
    if (s.contains("eta_kind"))
      c.system_overrides.eta_kind = s.at("eta_kind").get<std::string>();
    if (s.contains("eta_scale"))
      c.system_overrides.eta_scale = s.at("eta_scale").get<double>();
  }
  detail::maybe(j, "dt", c.dt);
  detail::maybe(j, "nsteps", c.nsteps);
  if (j.contains("sampling")) {
    const Json& s = j.at("sampling");
    detail::maybe(s, "mode", c.sampling_mode);
    detail::maybe(s, "per_axis", c.samples_per_axis);
    detail::maybe(s, "count", c.random_count);
    detail::maybe(s, "seed", c.random_seed);
  }
  if (j.contains("dictionary")) {
    const Json& s = j.at("dictionary");
    if (s.contains("family")) {
      c.dict_family = parse_family(s.at("family").get<std::string>());
    }
    detail::maybe(s, "freq_count", c.freq_count);
    if (s.contains("period_scale")) {
      c.period_scale = s.at("period_scale").get<double>();
    }
    detail::maybe(s, "gauss_scale", c.gauss_scale);
  }
  detail::maybe(j, "svd_tol", c.svd_tol);
  if (j.contains("iteration")) {
    const Json& s = j.at("iteration");
    detail::maybe(s, "tol", c.iter_tol);
    detail::maybe(s, "max_iterations", c.max_iterations);
    detail::maybe(s, "mode", c.iter_mode);
  }
  if (j.contains("roa")) {
    const Json& s = j.at("roa");
    detail::maybe(s, "resolution", c.roa_resolution);
    detail::maybe(s, "threshold", c.threshold);
    detail::maybe(s, "floor", c.floor);
    detail::maybe(s, "exclusion_radius", c.exclusion_radius);
    detail::maybe(s, "lie_margin", c.lie_margin);
  }
  if (j.contains("smooth")) {
    const Json& s = j.at("smooth");
    detail::maybe(s, "enabled", c.smooth_enabled);
    detail::maybe(s, "widths", c.smooth_widths);
    detail::maybe(s, "epochs", c.smooth_epochs);
    detail::maybe(s, "mse_tol", c.smooth_mse_tol);
    detail::maybe(s, "seed", c.smooth_seed);
    detail::maybe(s, "learning_rate", c.smooth_learning_rate);
    detail::maybe(s, "momentum", c.smooth_momentum);
    detail::maybe(s, "per_axis", c.smooth_samples_per_axis);
  }
  detail::maybe(j, "spectrum_top_k", c.spectrum_top_k);
  detail::maybe(j, "output_dir", c.output_dir);
  detail::maybe(j, "workers", c.workers);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw MissingArtifact("cannot open config file: " + path);
  Json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

inline Json config_to_json(const RunConfig& c) {
  Json j;
  j["system"]["id"] = c.system_id;
  if (c.system_overrides.mu) j["system"]["mu"] = *c.system_overrides.mu;
  if (c.system_overrides.eta_kind) j["system"]["eta_kind"] = *c.system_overrides.eta_kind;
  if (c.system_overrides.eta_scale) j["system"]["eta_scale"] = *c.system_overrides.eta_scale;
  j["dt"] = c.dt;
  j["nsteps"] = c.nsteps;
  j["sampling"]["mode"] = c.sampling_mode;
  j["sampling"]["per_axis"] = c.samples_per_axis;
  j["sampling"]["count"] = c.random_count;
  j["sampling"]["seed"] = c.random_seed;
  if (c.dict_family) j["dictionary"]["family"] = family_name(*c.dict_family);
  j["dictionary"]["freq_count"] = c.freq_count;
  if (c.period_scale) j["dictionary"]["period_scale"] = *c.period_scale;
  j["dictionary"]["gauss_scale"] = c.gauss_scale;
  j["svd_tol"] = c.svd_tol;
  j["iteration"]["tol"] = c.iter_tol;
  j["iteration"]["max_iterations"] = c.max_iterations;
  j["iteration"]["mode"] = c.iter_mode;
  j["roa"]["resolution"] = c.roa_resolution;
  j["roa"]["threshold"] = c.threshold;
  j["roa"]["floor"] = c.floor;
  j["roa"]["exclusion_radius"] = c.exclusion_radius;
  j["roa"]["lie_margin"] = c.lie_margin;
  j["smooth"]["enabled"] = c.smooth_enabled;
  j["smooth"]["widths"] = c.smooth_widths;
  j["smooth"]["epochs"] = c.smooth_epochs;
  j["smooth"]["mse_tol"] = c.smooth_mse_tol;
  j["smooth"]["seed"] = c.smooth_seed;
  j["smooth"]["learning_rate"] = c.smooth_learning_rate;
  j["smooth"]["momentum"] = c.smooth_momentum;
  j["smooth"]["per_axis"] = c.smooth_samples_per_axis;
  j["spectrum_top_k"] = c.spectrum_top_k;
  j["output_dir"] = c.output_dir;
  j["workers"] = c.workers;
  return j;
}

// Canned desk-scale configurations for the builtin benchmark problems, with
// pinned seeds, scales, and resolutions.
inline RunConfig benchmark_config(BenchmarkId id) {
  RunConfig c;
  c.system_id = benchmark_name(id);
  switch (id) {
    case BenchmarkId::cubic1d:
      c.samples_per_axis = {1001};
      c.freq_count = 128;  // 255 basis functions
      c.dt = 1.0;
      c.nsteps = 1001;
      c.iter_tol = 1e-2;
      c.max_iterations = 10;
      c.period_scale = 3.0;
      c.gauss_scale = 4.0;
      c.roa_resolution = {3000};
      c.threshold = 0.001;
      c.exclusion_radius = 0.05;
      break;
    case BenchmarkId::vdp_reversed:
      c.samples_per_axis = {60, 60};
      c.freq_count = 15;  // per-axis range +-14, 841 basis functions
      c.dt = 1.5;
      c.nsteps = 1001;
      c.iter_tol = 1e-2;
      c.max_iterations = 8;
      c.period_scale = 6.0;
      c.gauss_scale = 4.0;
      c.roa_resolution = {241, 241};
      c.threshold = 0.01;
      c.exclusion_radius = 0.1;
      break;
    case BenchmarkId::polynomial:
      c.samples_per_axis = {50, 50};
      c.freq_count = 13;  // 625 basis functions
      c.dt = 2.0;
      c.nsteps = 1001;
      c.max_iterations = 10;
      c.period_scale = 12.0;
      c.gauss_scale = 25.0;
      c.roa_resolution = {201, 201};
      c.threshold = 0.01;
      c.exclusion_radius = 0.2;
      break;
    case BenchmarkId::power2m:
      c.samples_per_axis = {40, 40};
      c.dict_family = DictFamily::complex_fourier_nd;
      c.freq_count = 13;  // 625 basis functions
      c.dt = 2.0;
      c.nsteps = 1001;
      c.max_iterations = 10;
      c.period_scale = 12.0;  // multiplier pi/6
      c.roa_resolution = {201, 201};
      c.threshold = 0.01;
      c.exclusion_radius = 0.2;
      break;
    case BenchmarkId::sys3d:
      c.samples_per_axis = {17, 17, 17};
      c.dict_family = DictFamily::complex_fourier_nd;
      c.freq_count = 4;  // 343 basis functions
      c.dt = 2.0;
      c.nsteps = 1001;
      c.max_iterations = 10;
      c.period_scale = 12.0;
      c.roa_resolution = {41, 41, 41};
      c.threshold = 0.2;
      c.exclusion_radius = 0.2;
      break;
    case BenchmarkId::stiff_vdp:
      c.samples_per_axis = {60, 60};
      c.freq_count = 15;
      c.dt = 1.0;
      c.nsteps = 4001;  // smaller step for the stiff oscillator
      c.max_iterations = 10;
      c.period_scale = 6.0;
      c.gauss_scale = 4.0;
      c.roa_resolution = {201, 201};
      c.threshold = 0.01;
      c.exclusion_radius = 0.1;
      break;
    case BenchmarkId::stiff2:
      c.samples_per_axis = {40, 40};
      c.freq_count = 13;
      c.dt = 1.0;
      c.nsteps = 2001;
      c.max_iterations = 10;
      c.period_scale = 8.0;
      c.gauss_scale = 9.0;
      c.roa_resolution = {201, 201};
      c.threshold = 0.01;
      c.exclusion_radius = 0.2;
      break;
  }
  c.output_dir = "out-" + c.system_id;
  return c;
}

}  // namespace zkroa
