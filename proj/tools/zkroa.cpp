// Command-line front end for the Zubov-Koopman region-of-attraction toolkit.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric divergence,
// 4 missing artifact.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zkroa/config.hpp"
#include "zkroa/io.hpp"
#include "zkroa/pipeline.hpp"

namespace {

using namespace zkroa;

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stoi(tok));
  }
  return out;
}

Vec parse_vec(const std::string& s) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    vals.push_back(std::stod(tok));
  }
  Vec v(static_cast<Eigen::Index>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
  return v;
}

void print_report_summary(const RunReport& rep, const RunConfig& cfg) {
  std::printf("system            %s\n", rep.system.c_str());
  std::printf("samples           %ld\n", rep.sample_count);
  std::printf("basis size        %d (rank %d)\n", rep.basis_size, rep.gram_rank);
  std::printf("iterations        %d (final step %.6g)\n", rep.iterations,
              rep.final_residual);
  std::printf("u at x_eq         %.6g\n", rep.u_at_xeq);
  std::printf("imag residue      %.3g (max |u| %.3g)\n", rep.max_imag_residue,
              rep.max_abs_value);
  std::printf("volume fraction   %.6g  [c/2: %.6g, 2c: %.6g]\n",
              rep.volume_fraction, rep.volume_fraction_half_c,
              rep.volume_fraction_twice_c);
  std::printf("verified fraction %.6g\n", rep.verified_fraction);
  if (rep.roa_lo.size() > 0) {
    std::printf("mask extent      ");
    for (Eigen::Index a = 0; a < rep.roa_lo.size(); ++a) {
      std::printf(" [%.5g, %.5g]", rep.roa_lo[a], rep.roa_hi[a]);
    }
    std::printf("\n");
  }
  std::printf("artifacts in      %s\n", cfg.output_dir.c_str());
}

// Flag storage shared between registration time and callback time. CLI11
// keeps pointers into this struct, so it must outlive parsing.
struct CommonFlags {
  std::string config_path;
  RunConfig ov;  // only fields whose flags were seen are applied
  double mu = 4.0;
  std::string samples_str;
  std::string family_str;
  double period = 0.0;
  double gauss = 0.0;
  std::string res_str;
  std::string sampling_mode;
};

// Registers the shared pipeline flags on a subcommand and returns a closure
// that produces the final config with precedence flags > file > defaults.
std::function<RunConfig()> add_pipeline_flags(CLI::App* cmd) {
  auto st = std::make_shared<CommonFlags>();
  auto* cfg_opt = cmd->add_option("--config", st->config_path, "JSON config file");
  auto* system = cmd->add_option("--system", st->ov.system_id, "builtin system id");
  auto* mu_opt = cmd->add_option("--mu", st->mu, "stiffness for stiff-vdp");
  auto* dt = cmd->add_option("--dt", st->ov.dt, "transport interval");
  auto* nsteps = cmd->add_option("--nsteps", st->ov.nsteps, "integration samples");
  auto* samples = cmd->add_option("--samples", st->samples_str,
                                  "grid samples per axis, e.g. 60x60 or 1001");
  auto* freq = cmd->add_option("--freq-count", st->ov.freq_count,
                               "per-axis frequency count N (range +-(N-1))");
  auto* family = cmd->add_option("--dict-family", st->family_str,
                                 "cos_gauss_1d|cos_gauss_nd|complex_fourier_nd");
  auto* period_opt = cmd->add_option("--period-scale", st->period, "dictionary period scale");
  auto* gauss_opt = cmd->add_option("--gauss-scale", st->gauss, "dictionary gaussian scale");
  auto* svd_tol = cmd->add_option("--svd-tol", st->ov.svd_tol, "relative eigenvalue cutoff");
  auto* tol = cmd->add_option("--tol", st->ov.iter_tol, "iteration stopping tolerance");
  auto* kmax = cmd->add_option("--max-iterations", st->ov.max_iterations, "iteration cap K");
  auto* mode = cmd->add_option("--mode", st->ov.iter_mode, "iteration mode: matrix|vector");
  auto* res = cmd->add_option("--resolution", st->res_str, "roa grid per axis, e.g. 241x241");
  auto* thr = cmd->add_option("--threshold", st->ov.threshold, "superlevel threshold c");
  auto* excl = cmd->add_option("--exclusion-radius", st->ov.exclusion_radius,
                               "ball around x_eq excluded from verification");
  auto* margin = cmd->add_option("--lie-margin", st->ov.lie_margin, "strictness margin");
  auto* smooth = cmd->add_flag("--smooth", st->ov.smooth_enabled,
                               "enable the smooth regressor stage");
  auto* spec_k = cmd->add_option("--spectrum", st->ov.spectrum_top_k, "dump top-k eigenvalues");
  auto* outdir = cmd->add_option("--out-dir", st->ov.output_dir, "artifact directory");
  auto* workers = cmd->add_option("--workers", st->ov.workers, "worker threads (0: auto)");
  auto* smode = cmd->add_option("--sampling", st->sampling_mode, "grid|random");
  auto* rcount = cmd->add_option("--random-count", st->ov.random_count, "random sample count");
  auto* rseed = cmd->add_option("--seed", st->ov.random_seed, "random sampling seed");

  return [=]() {
    RunConfig cfg;
    if (cfg_opt->count()) cfg = load_config(st->config_path);
    if (system->count()) cfg.system_id = st->ov.system_id;
    if (mu_opt->count()) cfg.system_overrides.mu = st->mu;
    if (dt->count()) cfg.dt = st->ov.dt;
    if (nsteps->count()) cfg.nsteps = st->ov.nsteps;
    if (samples->count()) {
      std::string s = st->samples_str;
      for (auto& ch : s)
        if (ch == 'x') ch = ',';
      cfg.samples_per_axis = parse_int_list(s);
    }
    if (freq->count()) cfg.freq_count = st->ov.freq_count;
    if (family->count()) cfg.dict_family = parse_family(st->family_str);
    if (period_opt->count()) cfg.period_scale = st->period;
    if (gauss_opt->count()) cfg.gauss_scale = st->gauss;
    if (svd_tol->count()) cfg.svd_tol = st->ov.svd_tol;
    if (tol->count()) cfg.iter_tol = st->ov.iter_tol;
    if (kmax->count()) cfg.max_iterations = st->ov.max_iterations;
    if (mode->count()) cfg.iter_mode = st->ov.iter_mode;
    if (res->count()) {
      std::string s = st->res_str;
      for (auto& ch : s)
        if (ch == 'x') ch = ',';
      cfg.roa_resolution = parse_int_list(s);
    }
    if (thr->count()) cfg.threshold = st->ov.threshold;
    if (excl->count()) cfg.exclusion_radius = st->ov.exclusion_radius;
    if (margin->count()) cfg.lie_margin = st->ov.lie_margin;
    if (smooth->count()) cfg.smooth_enabled = true;
    if (spec_k->count()) cfg.spectrum_top_k = st->ov.spectrum_top_k;
    if (outdir->count()) cfg.output_dir = st->ov.output_dir;
    if (workers->count()) cfg.workers = st->ov.workers;
    if (smode->count()) cfg.sampling_mode = st->sampling_mode;
    if (rcount->count()) cfg.random_count = st->ov.random_count;
    if (rseed->count()) cfg.random_seed = st->ov.random_seed;
    return cfg;
  };
}

int dispatch(CLI::App& app, int argc, char** argv) {
  // run
  auto* run_cmd = app.add_subcommand("run", "execute the full pipeline");
  auto run_cfg = add_pipeline_flags(run_cmd);
  run_cmd->callback([&, run_cfg] {
    const RunConfig cfg = run_cfg();
    const RunReport rep = zkroa::run(cfg);
    print_report_summary(rep, cfg);
  });

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "dump one clipped trajectory");
  {
    auto state = std::make_shared<std::tuple<std::string, std::string, double,
                                             int, std::string, double>>(
        "cubic1d", "", 1.0, 1001, "traj.csv", 4.0);
    auto& [sys_id, x0_str, dt, nsteps, out, mu] = *state;
    sim_cmd->add_option("--system", sys_id, "builtin system id");
    auto* mu_opt = sim_cmd->add_option("--mu", mu, "stiffness for stiff-vdp");
    sim_cmd->add_option("--x0", x0_str, "initial state, comma separated")->required();
    sim_cmd->add_option("--dt", dt, "horizon");
    sim_cmd->add_option("--nsteps", nsteps, "integration samples");
    sim_cmd->add_option("--out", out, "output CSV path");
    sim_cmd->callback([state, mu_opt] {
      auto& [sys_id, x0_str, dt, nsteps, out, mu] = *state;
      SystemOverrides ov;
      if (mu_opt->count()) ov.mu = mu;
      const SystemSpec sys = builtin_named(sys_id, ov);
      const Vec x0 = parse_vec(x0_str);
      if (x0.size() != sys.dim) throw ConfigError("--x0 has the wrong dimension");
      const ClippedTrajectory traj = simulate_clipped(sys, x0, dt, nsteps);
      write_trajectory_csv(out, traj);
      std::printf("wrote %s (%ld rows, exited=%s)\n", out.c_str(),
                  static_cast<long>(traj.times.size()),
                  traj.exited ? "true" : "false");
    });
  }

  // learn: sample -> stack -> fit
  auto* learn_cmd = app.add_subcommand("learn", "learn the operator matrix");
  auto learn_cfg = add_pipeline_flags(learn_cmd);
  learn_cmd->callback([learn_cfg] {
    RunConfig cfg = learn_cfg();
    ResolvedConfig rc = resolve_config(cfg);
    namespace fs = std::filesystem;
    fs::create_directories(rc.cfg.output_dir);
    const auto samples = make_samples(rc);
    const DataMatrices data = stack_data(rc.sys, rc.dict, samples, rc.cfg.dt,
                                         rc.cfg.nsteps, rc.cfg.workers);
    const OperatorMatrix op = fit_operator(data, rc.cfg.svd_tol);
    const std::string path = (fs::path(rc.cfg.output_dir) / "operator.txt").string();
    write_operator(path, op, rc.dict, data.meta);
    std::printf("wrote %s (size %d, rank %d, residual %.6g)\n", path.c_str(),
                rc.dict.size(), op.rank, op.residual);
    if (rc.cfg.spectrum_top_k > 0) {
      const auto pairs = spectrum(op.T, rc.cfg.spectrum_top_k, rc.cfg.dt);
      const std::string spath =
          (fs::path(rc.cfg.output_dir) / "spectrum.csv").string();
      write_spectrum_csv(spath, pairs);
      std::printf("wrote %s\n", spath.c_str());
    }
  });

  // iterate
  auto* it_cmd = app.add_subcommand("iterate", "iterate a learned operator");
  {
    auto state = std::make_shared<std::tuple<std::string, double, int,
                                             std::string, std::string>>(
        "out/operator.txt", 1e-2, 10, "matrix", "");
    auto& [op_path, tol, kmax, mode, out_path] = *state;
    it_cmd->add_option("--operator", op_path, "operator file")->required();
    it_cmd->add_option("--tol", tol, "stopping tolerance");
    it_cmd->add_option("--max-iterations", kmax, "iteration cap K");
    it_cmd->add_option("--mode", mode, "matrix|vector");
    it_cmd->add_option("--out", out_path, "output coefficients file");
    it_cmd->callback([state] {
      auto& [op_path, tol, kmax, mode, out_path] = *state;
      const OperatorFile of = read_operator(op_path);
      const UApprox u = build_u_zk(of.op, of.dict, of.dict.center, tol, kmax,
                                   mode == "vector");
      std::string out = out_path;
      if (out.empty()) {
        out = (std::filesystem::path(op_path).parent_path() / "ucoeffs.txt").string();
      }
      write_ucoeffs(out, u, of.meta.dt_total);
      std::printf("wrote %s (k=%d, final step %.6g)\n", out.c_str(),
                  u.iterations, u.final_residual);
    });
  }

  // predict-roa
  auto* roa_cmd = app.add_subcommand("predict-roa", "extract the connected superlevel set");
  {
    auto state = std::make_shared<
        std::tuple<std::string, std::string, std::string, double, double,
                   std::string, int, double>>("", "cubic1d", "", 0.001, 0.1, "", 0, 4.0);
    auto& [coeffs, sys_id, res_str, thr, excl, outdir, workers, mu] = *state;
    roa_cmd->add_option("--coeffs", coeffs, "coefficients file")->required();
    roa_cmd->add_option("--system", sys_id, "builtin system id");
    auto* mu_opt = roa_cmd->add_option("--mu", mu, "stiffness for stiff-vdp");
    roa_cmd->add_option("--resolution", res_str, "grid per axis, e.g. 241x241");
    roa_cmd->add_option("--threshold", thr, "superlevel threshold c");
    roa_cmd->add_option("--exclusion-radius", excl, "verification exclusion ball");
    roa_cmd->add_option("--out-dir", outdir, "artifact directory");
    roa_cmd->add_option("--workers", workers, "worker threads");
    roa_cmd->callback([state, mu_opt] {
      auto& [coeffs, sys_id, res_str, thr, excl, outdir, workers, mu] = *state;
      SystemOverrides ov;
      if (mu_opt->count()) ov.mu = mu;
      const SystemSpec sys = builtin_named(sys_id, ov);
      const UCoeffsFile uf = read_ucoeffs(coeffs);
      std::vector<int> res;
      if (!res_str.empty()) {
        std::string s = res_str;
        for (auto& ch : s)
          if (ch == 'x') ch = ',';
        res = parse_int_list(s);
      } else {
        res.assign(sys.dim, sys.dim == 1 ? 3000 : (sys.dim == 2 ? 241 : 41));
      }
      std::string dir = outdir.empty()
                            ? std::filesystem::path(coeffs).parent_path().string()
                            : outdir;
      if (dir.empty()) dir = ".";
      std::filesystem::create_directories(dir);
      const GridSpec grid{sys.region, res};
      std::vector<double> values(grid.cell_count()), lie(grid.cell_count());
      parallel_for(
          grid.cell_count(),
          [&](long i) {
            const Vec x = grid.center_flat(i);
            values[i] = uf.u.value(x);
            lie[i] = lie_derivative(sys, uf.u, x);
          },
          workers);
      const RoaMask mask =
          extract_roa(as_field(uf.u), sys, res, thr, workers, &values);
      write_field_csv(dir + "/ufield.csv", grid, values, lie, mask.mask);
      write_mask_csv(dir + "/mask.csv", mask);
      auto [lo, hi] = mask_extent(mask);
      std::printf("volume fraction %.6g\n", mask.volume_fraction);
      std::printf("mask extent    ");
      for (Eigen::Index a = 0; a < lo.size(); ++a) {
        std::printf(" [%.5g, %.5g]", lo[a], hi[a]);
      }
      std::printf("\nwrote %s/ufield.csv and %s/mask.csv\n", dir.c_str(), dir.c_str());
    });
  }

  // smooth
  auto* sm_cmd = app.add_subcommand("smooth", "fit the smooth regressor to a learned field");
  {
    auto state = std::make_shared<
        std::tuple<std::string, std::string, std::string, int, double,
                   std::uint64_t, double, std::string, std::string>>(
        "", "cubic1d", "15,15", 300, 1e-8, 1, 1e-2, "", "model.txt");
    auto& [coeffs, sys_id, widths_str, epochs, mse_tol, seed, lr, grid_str, out] = *state;
    sm_cmd->add_option("--coeffs", coeffs, "coefficients file")->required();
    sm_cmd->add_option("--system", sys_id, "builtin system id");
    sm_cmd->add_option("--widths", widths_str, "hidden widths, e.g. 15,15");
    sm_cmd->add_option("--epochs", epochs, "epoch cap");
    sm_cmd->add_option("--mse-tol", mse_tol, "stop when training MSE reaches this");
    sm_cmd->add_option("--seed", seed, "weight init seed");
    sm_cmd->add_option("--learning-rate", lr, "gradient descent step");
    sm_cmd->add_option("--grid", grid_str, "training grid per axis, e.g. 101");
    sm_cmd->add_option("--out", out, "model output path");
    sm_cmd->callback([state] {
      auto& [coeffs, sys_id, widths_str, epochs, mse_tol, seed, lr, grid_str, out] = *state;
      const SystemSpec sys = builtin_named(sys_id);
      const UCoeffsFile uf = read_ucoeffs(coeffs);
      std::vector<int> per_axis;
      if (!grid_str.empty()) {
        std::string s = grid_str;
        for (auto& ch : s)
          if (ch == 'x') ch = ',';
        per_axis = parse_int_list(s);
      } else {
        per_axis.assign(sys.dim, sys.dim == 1 ? 101 : 61);
      }
      const auto samples = grid_samples(sys.region, per_axis);
      std::vector<double> targets(samples.size());
      for (size_t i = 0; i < samples.size(); ++i) targets[i] = uf.u.value(samples[i]);
      TrainOptions opt;
      opt.learning_rate = lr;
      const SmoothModel model = train(samples, targets, parse_int_list(widths_str),
                                      epochs, mse_tol, seed, opt);
      write_model(out, model);
      std::printf("wrote %s (epochs %d, final mse %.6g)\n", out.c_str(),
                  model.epochs_run, model.final_mse);
    });
  }

  // verify
  auto* ver_cmd = app.add_subcommand("verify", "grid Lie-derivative check over the mask");
  {
    auto state = std::make_shared<
        std::tuple<std::string, std::string, std::string, std::string, double,
                   double, double, int, double>>("", "", "cubic1d", "", 0.001, 0.1,
                                                 0.0, 0, 4.0);
    auto& [coeffs, model_path, sys_id, res_str, thr, excl, margin, workers, mu] = *state;
    ver_cmd->add_option("--coeffs", coeffs, "coefficients file");
    ver_cmd->add_option("--model", model_path, "smooth model file (verified field)");
    ver_cmd->add_option("--system", sys_id, "builtin system id");
    auto* mu_opt = ver_cmd->add_option("--mu", mu, "stiffness for stiff-vdp");
    ver_cmd->add_option("--resolution", res_str, "grid per axis");
    ver_cmd->add_option("--threshold", thr, "superlevel threshold c");
    ver_cmd->add_option("--exclusion-radius", excl, "exclusion ball radius");
    ver_cmd->add_option("--lie-margin", margin, "strictness margin");
    ver_cmd->add_option("--workers", workers, "worker threads");
    ver_cmd->callback([state, mu_opt] {
      auto& [coeffs, model_path, sys_id, res_str, thr, excl, margin, workers, mu] = *state;
      if (coeffs.empty() && model_path.empty()) {
        throw ConfigError("verify: need --coeffs and/or --model");
      }
      SystemOverrides ov;
      if (mu_opt->count()) ov.mu = mu;
      const SystemSpec sys = builtin_named(sys_id, ov);
      ScalarField mask_field, verify_field;
      if (!coeffs.empty()) {
        const UCoeffsFile uf = read_ucoeffs(coeffs);
        mask_field = as_field(uf.u);
      }
      if (!model_path.empty()) {
        const SmoothModel model = read_model(model_path);
        verify_field = as_field(model);
        if (coeffs.empty()) mask_field = verify_field;
      } else {
        verify_field = mask_field;
      }
      std::vector<int> res;
      if (!res_str.empty()) {
        std::string s = res_str;
        for (auto& ch : s)
          if (ch == 'x') ch = ',';
        res = parse_int_list(s);
      } else {
        res.assign(sys.dim, sys.dim == 1 ? 3000 : (sys.dim == 2 ? 241 : 41));
      }
      const RoaMask mask = extract_roa(mask_field, sys, res, thr, workers);
      const double vf =
          verified_fraction(sys, verify_field, mask, excl, margin, workers);
      std::printf("volume fraction   %.6g\n", mask.volume_fraction);
      std::printf("verified fraction %.6g\n", vf);
    });
  }

  // benchmark
  auto* bm_cmd = app.add_subcommand("benchmark", "run a canned desk-scale study");
  {
    auto state = std::make_shared<std::tuple<std::string, std::string, int, double>>(
        "", "", 0, 4.0);
    auto& [id_str, outdir, workers, mu] = *state;
    bm_cmd->add_option("id", id_str,
                       "cubic1d|vdp-reversed|polynomial|power2m|sys3d|stiff-vdp|stiff2")
        ->required();
    bm_cmd->add_option("--out-dir", outdir, "artifact directory");
    bm_cmd->add_option("--workers", workers, "worker threads");
    auto* mu_opt = bm_cmd->add_option("--mu", mu, "stiffness for stiff-vdp");
    bm_cmd->callback([state, mu_opt] {
      auto& [id_str, outdir, workers, mu] = *state;
      const auto id = parse_benchmark_id(id_str);
      if (!id) throw ConfigError("unknown benchmark '" + id_str + "'");
      RunConfig cfg = benchmark_config(*id);
      if (!outdir.empty()) cfg.output_dir = outdir;
      if (workers > 0) cfg.workers = workers;
      if (mu_opt->count()) cfg.system_overrides.mu = mu;
      const RunReport rep = zkroa::run(cfg);
      print_report_summary(rep, cfg);
    });
  }

  app.require_subcommand(1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad flags are configuration errors
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zubov-Koopman region-of-attraction toolkit"};
  try {
    return dispatch(app, argc, argv);
  } catch (const zkroa::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const zkroa::MissingArtifact& e) {
    std::fprintf(stderr, "missing artifact: %s\n", e.what());
    return 4;
  } catch (const zkroa::IntegrationBlowup& e) {
    std::fprintf(stderr, "numeric divergence: %s\n", e.what());
    return 3;
  } catch (const zkroa::DivergenceError& e) {
    std::fprintf(stderr, "numeric divergence: %s\n", e.what());
    return 3;
  } catch (const zkroa::DegenerateData& e) {
    std::fprintf(stderr, "numeric divergence: %s\n", e.what());
    return 3;
  } catch (const zkroa::DomainError& e) {
    std::fprintf(stderr, "numeric divergence: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
