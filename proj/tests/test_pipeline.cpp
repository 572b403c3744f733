#include "zkroa/pipeline.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "zkroa/io.hpp"

namespace zkroa {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("zkroa-test-" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ZKROA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

TEST(Pipeline, DefaultConfigReproducesReducedCubicStudy) {
  RunConfig cfg;
  cfg.output_dir = temp_dir("default").string();
  cfg.workers = 2;
  const RunReport rep = run(cfg);
  EXPECT_EQ(rep.system, "cubic1d");
  EXPECT_LE(rep.iterations, 10);
  EXPECT_TRUE(rep.accepted);
  ASSERT_EQ(rep.roa_lo.size(), 1);
  EXPECT_NEAR(rep.roa_lo[0], -1.0, 0.02);
  EXPECT_NEAR(rep.roa_hi[0], 1.0, 0.02);
  for (const char* name : {"operator.txt", "ucoeffs.txt", "ufield.csv",
                           "mask.csv", "report.json"}) {
    EXPECT_TRUE(fs::exists(fs::path(cfg.output_dir) / name)) << name;
  }
}

TEST(Pipeline, DeterministicArtifactsAcrossRuns) {
  RunConfig cfg;
  cfg.samples_per_axis = {201};
  cfg.freq_count = 24;
  cfg.roa_resolution = {500};
  cfg.sampling_mode = "random";
  cfg.random_count = 300;
  cfg.random_seed = 123;
  cfg.smooth_enabled = true;
  cfg.smooth_epochs = 50;
  cfg.smooth_samples_per_axis = {64};

  cfg.output_dir = temp_dir("det-a").string();
  cfg.workers = 2;
  run(cfg);
  RunConfig cfg2 = cfg;
  cfg2.output_dir = temp_dir("det-b").string();
  cfg2.workers = 1;  // worker count must not affect the artifacts
  run(cfg2);
  for (const char* name :
       {"operator.txt", "ucoeffs.txt", "ufield.csv", "mask.csv", "model.txt"}) {
    const std::string a = read_file(fs::path(cfg.output_dir) / name);
    const std::string b = read_file(fs::path(cfg2.output_dir) / name);
    ASSERT_FALSE(a.empty()) << name;
    EXPECT_EQ(a, b) << name << " differs between runs";
  }
}

TEST(Pipeline, ConfigJsonRoundTrip) {
  RunConfig c;
  c.system_id = "vdp-reversed";
  c.system_overrides.mu = 5.0;
  c.dt = 1.5;
  c.samples_per_axis = {60, 60};
  c.dict_family = DictFamily::cos_gauss_nd;
  c.freq_count = 15;
  c.period_scale = 6.0;
  c.roa_resolution = {241, 241};
  c.threshold = 0.01;
  c.smooth_enabled = true;
  const RunConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(back.system_id, c.system_id);
  EXPECT_EQ(*back.system_overrides.mu, 5.0);
  EXPECT_EQ(back.dt, c.dt);
  EXPECT_EQ(back.samples_per_axis, c.samples_per_axis);
  EXPECT_EQ(*back.dict_family, DictFamily::cos_gauss_nd);
  EXPECT_EQ(*back.period_scale, 6.0);
  EXPECT_EQ(back.roa_resolution, c.roa_resolution);
  EXPECT_EQ(back.threshold, c.threshold);
  EXPECT_TRUE(back.smooth_enabled);
}

TEST(Pipeline, FailedStagePersistsPartialArtifacts) {
  RunConfig cfg;
  cfg.samples_per_axis = {101};
  cfg.freq_count = 12;
  cfg.roa_resolution = {200};
  cfg.threshold = 50.0;  // no cell can reach this: extraction must fail
  cfg.output_dir = temp_dir("fail").string();
  cfg.workers = 2;
  EXPECT_THROW(run(cfg), DomainError);
  EXPECT_TRUE(fs::exists(fs::path(cfg.output_dir) / "operator.txt"));
  EXPECT_TRUE(fs::exists(fs::path(cfg.output_dir) / "ucoeffs.txt"));
  const std::string report = read_file(fs::path(cfg.output_dir) / "report.json");
  EXPECT_NE(report.find("\"failed_stage\": \"extract\""), std::string::npos);
}

TEST(Pipeline, OperatorAndCoeffFilesRoundTrip) {
  RunConfig cfg;
  cfg.samples_per_axis = {101};
  cfg.freq_count = 12;
  cfg.roa_resolution = {200};
  cfg.output_dir = temp_dir("roundtrip").string();
  cfg.workers = 2;
  run(cfg);
  const OperatorFile of = read_operator((fs::path(cfg.output_dir) / "operator.txt").string());
  EXPECT_EQ(of.op.T.rows(), 23);
  EXPECT_EQ(of.meta.dt_total, 1.0);
  EXPECT_EQ(of.dict.freq_count, 12);
  const UCoeffsFile uf = read_ucoeffs((fs::path(cfg.output_dir) / "ucoeffs.txt").string());
  EXPECT_EQ(uf.u.coeffs.size(), 23);
  // text round trip is exact
  const fs::path copy = fs::path(cfg.output_dir) / "operator-copy.txt";
  write_operator(copy.string(), of.op, of.dict, of.meta);
  EXPECT_EQ(read_file(fs::path(cfg.output_dir) / "operator.txt"), read_file(copy));
}

TEST(Cli, BenchmarkSmokeAndExitCodes) {
  const fs::path dir = temp_dir("cli");
  // unknown system: configuration error
  EXPECT_EQ(run_cli("run --system does-not-exist --out-dir " + (dir / "x").string()), 2);
  // missing artifact
  EXPECT_EQ(run_cli("iterate --operator " + (dir / "nope.txt").string()), 4);
  // bad flags
  EXPECT_EQ(run_cli("run --no-such-flag"), 2);
  // simulate writes the clipped trajectory; repelled start ends pinned at 1.5
  const fs::path traj = dir / "traj.csv";
  EXPECT_EQ(run_cli("simulate --system cubic1d --x0 1.4 --dt 1 --nsteps 1001 --out " +
                    traj.string()),
            0);
  {
    std::ifstream f(traj);
    std::string line, last;
    std::getline(f, line);
    EXPECT_EQ(line, "t,x_1,I");
    while (std::getline(f, line)) {
      if (!line.empty()) last = line;
    }
    EXPECT_NE(last.find(",1.5,"), std::string::npos) << last;
  }
  // tiny end-to-end run through the CLI
  EXPECT_EQ(run_cli("run --samples 101 --freq-count 12 --resolution 200 --out-dir " +
                    (dir / "tiny").string()),
            0);
  // artifact-driven subcommands consume the run's outputs
  EXPECT_EQ(run_cli("iterate --operator " + (dir / "tiny" / "operator.txt").string() +
                    " --out " + (dir / "tiny" / "uc2.txt").string()),
            0);
  EXPECT_EQ(run_cli("predict-roa --coeffs " + (dir / "tiny" / "uc2.txt").string() +
                    " --system cubic1d --resolution 200 --threshold 0.001 --out-dir " +
                    (dir / "roa2").string()),
            0);
  EXPECT_EQ(run_cli("verify --coeffs " + (dir / "tiny" / "uc2.txt").string() +
                    " --system cubic1d --resolution 200 --threshold 0.001"),
            0);
}

TEST(Cli, ConfigFileWithFlagOverridePrecedence) {
  const fs::path dir = temp_dir("cli-config");
  {
    std::ofstream f(dir / "cfg.json");
    f << R"({"system": {"id": "cubic1d"},
             "sampling": {"per_axis": [151]},
             "dictionary": {"freq_count": 10},
             "roa": {"resolution": [200]},
             "output_dir": ")" << (dir / "from-file").string() << R"("})";
  }
  // flag overrides the file's freq_count (19 -> 37 basis functions)
  ASSERT_EQ(run_cli("run --config " + (dir / "cfg.json").string() +
                    " --freq-count 19"),
            0);
  const std::string report = read_file(dir / "from-file" / "report.json");
  EXPECT_NE(report.find("\"basis_size\": 37"), std::string::npos) << report;
  EXPECT_NE(report.find("\"sample_count\": 151"), std::string::npos);
}

TEST(Cli, VerifyConstantFieldYieldsZeroFraction) {
  // A constant field has zero Lie derivative everywhere: nothing verifies.
  const fs::path dir = temp_dir("cli-const");
  UApprox u;
  u.dict = make_dictionary(DictFamily::complex_fourier_nd, 1, 1, 3.0, 1.0);
  u.coeffs = CVec::Ones(1);
  u.iterations = 1;
  write_ucoeffs((dir / "const.txt").string(), u, 1.0);
  const std::string out = (dir / "out.txt").string();
  const std::string cmd = std::string(ZKROA_CLI_PATH) +
                          " verify --coeffs " + (dir / "const.txt").string() +
                          " --system cubic1d --resolution 100 --threshold 0.5 > " + out;
  ASSERT_EQ(WEXITSTATUS(std::system(cmd.c_str())), 0);
  const std::string text = read_file(out);
  EXPECT_NE(text.find("verified fraction 0"), std::string::npos) << text;
}

}  // namespace
}  // namespace zkroa
