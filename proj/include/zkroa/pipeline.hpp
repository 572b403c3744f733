#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "zkroa/config.hpp"
#include "zkroa/edmd.hpp"
#include "zkroa/io.hpp"
#include "zkroa/roa.hpp"
#include "zkroa/smooth.hpp"

namespace zkroa {

struct RunReport {
  std::string system;
  std::string dict_descriptor;
  long sample_count = 0;
  int basis_size = 0;
  int gram_rank = 0;
  double fit_residual = 0.0;
  int iterations = 0;
  double final_residual = 0.0;
  double u_at_xeq = 0.0;
  double max_abs_value = 0.0;
  double max_imag_residue = 0.0;     // over the evaluation grid
  bool accepted = false;             // imag residue and u(x_eq) within bounds
  double volume_fraction = 0.0;
  double volume_fraction_half_c = 0.0;   // sensitivity: threshold c/2
  double volume_fraction_twice_c = 0.0;  // sensitivity: threshold 2c
  double verified_fraction = 0.0;
  Vec roa_lo, roa_hi;                // per-axis extent of the mask
  double smooth_final_mse = 0.0;
  int smooth_epochs = 0;
  std::map<std::string, double> timings_sec;
  std::vector<std::string> files;
  std::string failed_stage;          // empty on success
};

inline Json report_to_json(const RunReport& r, const RunConfig& cfg) {
  Json j;
  j["system"] = r.system;
  j["dictionary"] = r.dict_descriptor;
  j["sample_count"] = r.sample_count;
  j["basis_size"] = r.basis_size;
  j["gram_rank"] = r.gram_rank;
  j["fit_residual"] = r.fit_residual;
  j["iterations"] = r.iterations;
  j["final_residual"] = r.final_residual;
  j["u_at_xeq"] = r.u_at_xeq;
  j["max_abs_value"] = r.max_abs_value;
  j["max_imag_residue"] = r.max_imag_residue;
  j["accepted"] = r.accepted;
  j["volume_fraction"] = r.volume_fraction;
  j["volume_fraction_half_c"] = r.volume_fraction_half_c;
  j["volume_fraction_twice_c"] = r.volume_fraction_twice_c;
  j["verified_fraction"] = r.verified_fraction;
  if (r.roa_lo.size() > 0) {
    j["roa_lo"] = std::vector<double>(r.roa_lo.data(), r.roa_lo.data() + r.roa_lo.size());
    j["roa_hi"] = std::vector<double>(r.roa_hi.data(), r.roa_hi.data() + r.roa_hi.size());
  }
  if (cfg.smooth_enabled) {
    j["smooth_final_mse"] = r.smooth_final_mse;
    j["smooth_epochs"] = r.smooth_epochs;
  }
  j["timings_sec"] = r.timings_sec;
  j["files"] = r.files;
  if (!r.failed_stage.empty()) j["failed_stage"] = r.failed_stage;
  j["config"] = config_to_json(cfg);
  return j;
}

// Fill dimension-dependent defaults that the flat config leaves empty.
struct ResolvedConfig {
  RunConfig cfg;
  SystemSpec sys;
  Dictionary dict;
};

inline ResolvedConfig resolve_config(RunConfig cfg) {
  ResolvedConfig rc;
  rc.sys = builtin_named(cfg.system_id, cfg.system_overrides);
  const int dim = rc.sys.dim;

  if (cfg.samples_per_axis.empty()) {
    cfg.samples_per_axis.assign(dim, dim == 1 ? 501 : 60);
  }
  if (static_cast<int>(cfg.samples_per_axis.size()) != dim) {
    throw ConfigError("sampling per_axis must list one count per axis");
  }
  if (cfg.roa_resolution.empty()) {
    cfg.roa_resolution.assign(dim, dim == 1 ? 3000 : (dim == 2 ? 241 : 41));
  }
  if (static_cast<int>(cfg.roa_resolution.size()) != dim) {
    throw ConfigError("roa resolution must list one count per axis");
  }
  if (cfg.smooth_samples_per_axis.empty()) {
    cfg.smooth_samples_per_axis.assign(dim, dim == 1 ? 101 : 61);
  }
  const DictFamily family = cfg.dict_family.value_or(
      dim == 1 ? DictFamily::cos_gauss_1d : DictFamily::cos_gauss_nd);
  const double period = cfg.period_scale.value_or(rc.sys.region.max_width());
  rc.dict = make_dictionary(family, cfg.freq_count, dim, period,
                            cfg.gauss_scale, rc.sys.x_eq);
  cfg.dict_family = family;
  cfg.period_scale = period;
  rc.cfg = std::move(cfg);
  return rc;
}

// Uniformly spaced sample grid over the region, endpoints included.
inline std::vector<Vec> grid_samples(const Box& box,
                                     const std::vector<int>& per_axis) {
  const int dim = box.dim();
  long total = 1;
  for (int c : per_axis) {
    if (c < 2) throw ConfigError("need at least 2 samples per axis");
    total *= c;
  }
  std::vector<Vec> out;
  out.reserve(total);
  std::vector<int> idx(dim, 0);
  for (long f = 0; f < total; ++f) {
    Vec x(dim);
    long rem = f;
    for (int a = dim - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % per_axis[a]);
      rem /= per_axis[a];
    }
    for (int a = 0; a < dim; ++a) {
      x[a] = box.lo[a] + box.width(a) * idx[a] / (per_axis[a] - 1);
    }
    out.push_back(std::move(x));
  }
  return out;
}

inline std::vector<Vec> random_samples(const Box& box, long count,
                                       std::uint64_t seed) {
  detail::SeededUniform rng(seed);
  std::vector<Vec> out;
  out.reserve(count);
  for (long i = 0; i < count; ++i) {
    Vec x(box.dim());
    for (int a = 0; a < box.dim(); ++a) {
      x[a] = rng.uniform(box.lo[a], box.hi[a]);
    }
    out.push_back(std::move(x));
  }
  return out;
}

inline std::vector<Vec> make_samples(const ResolvedConfig& rc) {
  if (rc.cfg.sampling_mode == "grid") {
    return grid_samples(rc.sys.region, rc.cfg.samples_per_axis);
  }
  if (rc.cfg.sampling_mode == "random") {
    return random_samples(rc.sys.region, rc.cfg.random_count,
                          rc.cfg.random_seed);
  }
  throw ConfigError("unknown sampling mode '" + rc.cfg.sampling_mode + "'");
}

// Execute the full pipeline: sample -> stack -> fit -> iterate -> extract ->
// (smooth) -> verify, writing every artifact into cfg.output_dir. On a stage
// failure the partial artifacts and a report naming the stage are kept, and
// the original exception is rethrown.
inline RunReport run(const RunConfig& raw_cfg) {
  namespace fs = std::filesystem;
  using Clock = std::chrono::steady_clock;

  ResolvedConfig rc = resolve_config(raw_cfg);
  const RunConfig& cfg = rc.cfg;
  const SystemSpec& sys = rc.sys;
  const Dictionary& dict = rc.dict;

  fs::create_directories(cfg.output_dir);
  auto path_of = [&](const std::string& name) {
    return (fs::path(cfg.output_dir) / name).string();
  };

  RunReport rep;
  rep.system = sys.name;
  rep.dict_descriptor = dict.descriptor();
  rep.basis_size = dict.size();

  std::string stage = "sample";
  auto stage_start = Clock::now();
  auto finish_stage = [&](const std::string& next) {
    const double secs =
        std::chrono::duration<double>(Clock::now() - stage_start).count();
    rep.timings_sec[stage] = secs;
    stage = next;
    stage_start = Clock::now();
  };
  auto persist_report = [&] {
    std::ofstream f(path_of("report.json"));
    f << report_to_json(rep, cfg).dump(2) << '\n';
  };

  try {
    // sample + stack
    const std::vector<Vec> samples = make_samples(rc);
    rep.sample_count = static_cast<long>(samples.size());
    finish_stage("stack");
    const DataMatrices data =
        stack_data(sys, dict, samples, cfg.dt, cfg.nsteps, cfg.workers);
    finish_stage("fit");

    const OperatorMatrix op = fit_operator(data, cfg.svd_tol);
    rep.gram_rank = op.rank;
    rep.fit_residual = op.residual;
    write_operator(path_of("operator.txt"), op, dict, data.meta);
    rep.files.push_back("operator.txt");
    if (cfg.spectrum_top_k > 0) {
      const auto pairs = spectrum(op.T, cfg.spectrum_top_k, cfg.dt);
      write_spectrum_csv(path_of("spectrum.csv"), pairs);
      rep.files.push_back("spectrum.csv");
    }
    finish_stage("iterate");

    const UApprox u = build_u_zk(op, dict, sys.x_eq, cfg.iter_tol,
                                 cfg.max_iterations, cfg.iter_mode == "vector");
    rep.iterations = u.iterations;
    rep.final_residual = u.final_residual;
    rep.u_at_xeq = u.value(sys.x_eq);
    write_ucoeffs(path_of("ucoeffs.txt"), u, cfg.dt);
    rep.files.push_back("ucoeffs.txt");
    finish_stage("grid_eval");

    const GridSpec grid{sys.region, cfg.roa_resolution};
    const long cells = grid.cell_count();
    std::vector<double> values(cells), imag(cells), lie(cells);
    parallel_for(
        cells,
        [&](long i) {
          const Vec x = grid.center_flat(i);
          const CVec z = eval(dict, x);
          const Complex val = (z.transpose() * u.coeffs)(0);
          values[i] = val.real();
          imag[i] = std::abs(val.imag());
          lie[i] = lie_derivative(sys, u, x);
        },
        cfg.workers);
    for (long i = 0; i < cells; ++i) {
      rep.max_abs_value = std::max(rep.max_abs_value, std::abs(values[i]));
      rep.max_imag_residue = std::max(rep.max_imag_residue, imag[i]);
    }
    rep.accepted = rep.max_imag_residue <= 0.1 * rep.max_abs_value &&
                   rep.u_at_xeq >= 0.9 && rep.u_at_xeq <= 1.1;
    finish_stage("extract");

    const ScalarField u_field = as_field(u);
    const RoaMask mask = extract_roa(u_field, sys, cfg.roa_resolution,
                                     cfg.threshold, cfg.workers, &values);
    rep.volume_fraction = mask.volume_fraction;
    auto [lo, hi] = mask_extent(mask);
    rep.roa_lo = lo;
    rep.roa_hi = hi;
    // Threshold sensitivity, reported alongside the chosen c.
    auto vol_at = [&](double c) {
      try {
        return extract_roa(u_field, sys, cfg.roa_resolution, c, cfg.workers,
                           &values)
            .volume_fraction;
      } catch (const DomainError&) {
        return 0.0;
      }
    };
    rep.volume_fraction_half_c = vol_at(0.5 * cfg.threshold);
    rep.volume_fraction_twice_c = vol_at(2.0 * cfg.threshold);
    write_mask_csv(path_of("mask.csv"), mask);
    rep.files.push_back("mask.csv");
    finish_stage("smooth");

    ScalarField verify_field = u_field;
    if (cfg.smooth_enabled) {
      const std::vector<Vec> sm_samples =
          grid_samples(sys.region, cfg.smooth_samples_per_axis);
      std::vector<double> targets(sm_samples.size());
      parallel_for(
          static_cast<long>(sm_samples.size()),
          [&](long i) { targets[i] = u.value(sm_samples[i]); }, cfg.workers);
      TrainOptions opt;
      opt.learning_rate = cfg.smooth_learning_rate;
      opt.momentum = cfg.smooth_momentum;
      const SmoothModel model =
          train(sm_samples, targets, cfg.smooth_widths, cfg.smooth_epochs,
                cfg.smooth_mse_tol, cfg.smooth_seed, opt);
      rep.smooth_final_mse = model.final_mse;
      rep.smooth_epochs = model.epochs_run;
      write_model(path_of("model.txt"), model);
      rep.files.push_back("model.txt");
      verify_field = as_field(model);
      // The field CSV reports the Lie derivative actually used for checks.
      parallel_for(
          cells,
          [&](long i) {
            lie[i] = lie_derivative(sys, verify_field, grid.center_flat(i));
          },
          cfg.workers);
    }
    finish_stage("verify");

    rep.verified_fraction =
        verified_fraction(sys, verify_field, mask, cfg.exclusion_radius,
                          cfg.lie_margin, cfg.workers);
    write_field_csv(path_of("ufield.csv"), grid, values, lie, mask.mask);
    rep.files.push_back("ufield.csv");
    finish_stage("report");

    rep.files.push_back("report.json");
    persist_report();
    return rep;
  } catch (...) {
    rep.failed_stage = stage;
    rep.files.push_back("report.json");
    persist_report();
    throw;
  }
}

}  // namespace zkroa
