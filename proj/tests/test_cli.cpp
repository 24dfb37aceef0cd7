#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "atlasid/io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "atlasid_test_cli";

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& args, const std::string& env = "") {
  fs::create_directories(kRoot);
  const fs::path out = kRoot / "stdout.txt", err = kRoot / "stderr.txt";
  const std::string cmd = env + " " + ATLASID_CLI_PATH + " " + args + " >" + out.string() +
                          " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

fs::path fresh(const std::string& name) {
  const fs::path d = kRoot / name;
  fs::remove_all(d);
  return d;
}

json manifest(const fs::path& dir) { return json::parse(slurp(dir / "manifest.json")); }

}  // namespace

TEST(Cli, HelpAndUsage) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("simulate --no-such-flag 1").code, 2);
}

TEST(Cli, ZeroStepsIsConfigError) {
  const auto r = run("simulate --steps 0 --out " + fresh("zero").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("steps must be ≥ 1"), std::string::npos) << r.err;
}

TEST(Cli, UnknownConfigKeyNamed) {
  const auto dir = fresh("unknown");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.cfg") << "steps=10\nstepz=5\n";
  const auto r = run("simulate --config " + (dir / "bad.cfg").string() + " --out " + dir.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("stepz"), std::string::npos);
}

TEST(Cli, InvalidModelNamesKey) {
  const auto r = run("simulate --g 0.1,-0.1 --sigma2 1 --steps 10 --out " +
                     fresh("badmodel").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("'g'"), std::string::npos);
  const auto r2 = run("simulate --depth 3 --simple-g 1 --sigma2 -1 --steps 10 --out " +
                      fresh("badmodel").string());
  EXPECT_EQ(r2.code, 2);
  EXPECT_NE(r2.err.find("sigma2"), std::string::npos);
}

TEST(Cli, IoErrorExitCode) {
  const auto dir = fresh("io");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  EXPECT_EQ(run("simulate --steps 10 --out " + (dir / "file" / "sub").string()).code, 3);
  EXPECT_EQ(run("variogram --out " + dir.string() + " " + (dir / "missing.bin").string()).code,
            3);
}

TEST(Cli, NumericalFailureExitCode) {
  const auto r = run("simulate --depth 2 --simple-g 1e300 --sigma2 1 --dt 1e10 --steps 100 "
                     "--burn-in 0 --out " + fresh("numeric").string());
  EXPECT_EQ(r.code, 4) << r.err;
}

TEST(Cli, SimulateRerunIsByteIdentical) {
  const auto a = fresh("sim_a"), b = fresh("sim_b");
  const auto r = run("--quiet simulate --depth 10 --simple-g .0001 --sigma2 .0001 --steps 2000 "
                     "--burn-in 100 --seed 1 --paths 2 --format csv --record-mean true --out " +
                     a.string());
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(fs::exists(a / "path_0000.csv"));
  ASSERT_TRUE(fs::exists(a / "path_0001.csv"));
  const auto m = manifest(a);
  EXPECT_EQ(m["command"], "simulate");
  EXPECT_EQ(m["config"]["steps"], "2000");
  EXPECT_EQ(m["config"]["burn_in"], "100");
  EXPECT_EQ(m["config"]["init_mode"], "exponential_gaps");
  EXPECT_TRUE(m.contains("wall_seconds"));
  EXPECT_TRUE(m.contains("steps_per_second"));
  EXPECT_EQ(m["outputs"].size(), 2u);

  ASSERT_EQ(run("--quiet simulate --config " + (a / "run.cfg").string() + " --out " +
                b.string()).code, 0);
  EXPECT_EQ(slurp(a / "path_0000.csv"), slurp(b / "path_0000.csv"));
  EXPECT_EQ(slurp(a / "path_0001.csv"), slurp(b / "path_0001.csv"));
}

TEST(Cli, FlagsOverrideConfigFile) {
  const auto dir = fresh("precedence");
  fs::create_directories(dir);
  std::ofstream(dir / "c.cfg") << "# test\nsteps=50\nseed=9\nformat=csv\n";
  ASSERT_EQ(run("--quiet simulate --config " + (dir / "c.cfg").string() +
                " --steps 30 --burn-in 0 --out " + dir.string()).code, 0);
  const auto m = manifest(dir);
  EXPECT_EQ(m["config"]["steps"], "30");
  EXPECT_EQ(m["config"]["seed"], "9");
  EXPECT_EQ(m["config"]["dt"], "1");
  const auto lp = atlasid::io::read_path(dir / "path_0000.csv");
  EXPECT_EQ(lp.series.values.size(), 30u);
}

TEST(Cli, EnvironmentSetsDefaultOutput) {
  const auto dir = fresh("envout");
  ASSERT_EQ(run("--quiet simulate --steps 10 --burn-in 0", "ATLASID_OUT_DIR=" + dir.string())
                .code, 0);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "path_0000.bin"));
}

TEST(Cli, VariogramPoolsPaths) {
  const auto sim = fresh("vg_sim"), out = fresh("vg_out");
  ASSERT_EQ(run("--quiet simulate --steps 5000 --burn-in 100 --paths 3 --out " + sim.string())
                .code, 0);
  const auto r = run("--quiet variogram --lags dyadic:1000000 --out " + out.string() + " " +
                     (sim / "path_0000.bin").string() + " " + (sim / "path_0001.bin").string() +
                     " " + (sim / "path_0002.bin").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto v = atlasid::io::read_variogram_csv(out / "variogram.csv");
  EXPECT_EQ(v.lags.back(), 4096u);  // clipped to the series length
  EXPECT_EQ(v.meta.paths, 3u);
  EXPECT_TRUE(v.has_std_errors());
  const auto t = atlasid::io::read_csv(out / "variogram.csv");
  EXPECT_FALSE(t.rows[0][t.column("stderr_rel")].empty());
}

TEST(Cli, VariogramRejectsMismatchedInputs) {
  const auto a = fresh("mm_a"), b = fresh("mm_b");
  ASSERT_EQ(run("--quiet simulate --steps 500 --burn-in 0 --out " + a.string()).code, 0);
  ASSERT_EQ(run("--quiet simulate --steps 500 --burn-in 0 --dt 0.5 --out " + b.string()).code,
            0);
  const auto r = run("--quiet variogram --out " + fresh("mm_out").string() + " " +
                     (a / "path_0000.bin").string() + " " + (b / "path_0000.bin").string());
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, VariogramOfConstantInput) {
  const auto dir = fresh("const");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "flat.csv");
    f << "# depth=1\n# g=0\n# sigma2=1\n# dt=1\nstep,t,x_top\n";
    for (int k = 0; k < 40; ++k) f << k << ',' << k + 1 << ",2.5\n";
  }
  ASSERT_EQ(run("--quiet variogram --out " + dir.string() + " " + (dir / "flat.csv").string())
                .code, 0);
  const auto t = atlasid::io::read_csv(dir / "variogram.csv");
  ASSERT_EQ(t.rows.size(), 6u);
  for (const auto& row : t.rows) EXPECT_EQ(row[t.column("variogram")], "0");
}

TEST(Cli, IdentifyBrownianAndMalformed) {
  const auto sim = fresh("bm_sim"), out = fresh("bm_out");
  ASSERT_EQ(run("--quiet simulate --depth 1 --sigma2 1 --steps 200000 --burn-in 0 --paths 4 "
                "--out " + sim.string()).code, 0);
  std::string inputs;
  for (int k = 0; k < 4; ++k) inputs += " " + (sim / ("path_000" + std::to_string(k) + ".bin")).string();
  ASSERT_EQ(run("--quiet variogram --lags dyadic:65536 --out " + sim.string() + inputs).code, 0);
  const auto r = run("--quiet identify --out " + out.string() + " " +
                     (sim / "variogram.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("n_hat=1\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("g_hat=0\n"), std::string::npos);
  EXPECT_NE(r.out.find("plateau_ok="), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "identify.csv"));
  EXPECT_TRUE(fs::exists(out / "manifest.json"));

  std::ofstream(out / "junk.csv") << "hello,world\n1,2\n";
  EXPECT_EQ(run("--quiet identify --out " + out.string() + " " + (out / "junk.csv").string())
                .code, 2);
}

TEST(Cli, ReproduceCommandDegradedQuality) {
  const auto a = fresh("fig_a"), b = fresh("fig_b");
  const std::string args = "--quiet reproduce-fig1 --steps 1e5 --burn-in 1000 --paths 2 "
                           "--curve-paths 2 --curve-steps 65536 --curve-burn-in 1000 --out ";
  const auto r = run(args + a.string());
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"fig1_eq10.csv", "fig1_eq13.csv", "fig1.svg", "manifest.json", "run.cfg"}) {
    EXPECT_TRUE(fs::exists(a / f)) << f;
  }
  const auto m = manifest(a);
  EXPECT_FALSE(m["results"]["eq10"]["plateau_ok"].get<bool>());
  const auto v = atlasid::io::read_variogram_csv(a / "fig1_eq10.csv");
  EXPECT_EQ(v.lags.back(), 65536u);

  ASSERT_EQ(run(args + b.string()).code, 0);
  EXPECT_EQ(slurp(a / "fig1_eq10.csv"), slurp(b / "fig1_eq10.csv"));
  EXPECT_EQ(slurp(a / "fig1_eq13.csv"), slurp(b / "fig1_eq13.csv"));
  EXPECT_EQ(slurp(a / "fig1.svg"), slurp(b / "fig1.svg"));
}

TEST(Cli, BuildCurve) {
  const auto dir = fresh("curve");
  const auto r = run("--quiet build-curve --depth 3 --paths 2 --steps 4096 --burn-in 100 --out " +
                     dir.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto c = atlasid::io::read_curve_csv(dir / "canonical_n3.csv");
  EXPECT_EQ(c.n, 3u);
  EXPECT_EQ(c.provenance.paths, 2u);
  EXPECT_EQ(run("--quiet build-curve --depth 1 --out " + dir.string()).code, 2);
}
