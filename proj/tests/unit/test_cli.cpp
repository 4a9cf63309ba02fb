#include "commands.hpp"
#include "run_config.hpp"

#include "scm/io.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace scm::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("scm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv("SCM_OUTPUT_DIR");
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args, std::string* err_text = nullptr) {
    args.insert(args.begin(), "scm");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out;
    std::ostringstream err;
    const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    if (err_text) *err_text = err.str();
    return code;
  }

  fs::path simulate_panel() {
    spit(dir_ / "sim.ini",
         "[simulate]\nrows = 2\ncols = 2\nyears = 5\nfirst_year = 2001\npopulation = 50000\nseed = 3\n"
         "hypers = tau_kappa:10, delta:1.1\n[data]\noutput = sim\n");
    EXPECT_EQ(run({"simulate", "--config", (dir_ / "sim.ini").string()}), 0);
    return dir_ / "sim";
  }

  void write_fit_config(const std::string& extra = "") {
    spit(dir_ / "fit.ini",
         "[data]\ncounts = sim/panel.csv\nadjacency = sim/adjacency.txt\noutput = out\n"
         "[fit]\nburn_in = 100\nsamples = 100\nthin = 1\nseed = 11\n" +
             extra);
  }

  fs::path dir_;
};

TEST(RunConfigParse, ValuesAndErrors) {
  std::istringstream in(
      "[model]\nmodel = model3\nnum_rho = 2\n[fit]\nsamples = 10\nfixed = delta:1.5, tau_u:3\n"
      "[validate]\nfractions = 0.5, 1.0\n");
  const RunConfig c = parse_run_config(in, "/base");
  EXPECT_EQ(c.model.model, ModelId::Model3);
  EXPECT_EQ(c.model.num_rho, 2);
  EXPECT_EQ(c.fit.n_samples, 10);
  EXPECT_EQ(c.fit.fixed_hypers.at("tau_u"), 3.0);
  EXPECT_EQ(c.harness.fractions, (std::vector<double>{0.5, 1.0}));
  EXPECT_EQ(c.data.output, fs::path("scm-output"));

  std::istringstream bad_section("[nope]\nx = 1\n");
  EXPECT_THROW(parse_run_config(bad_section), InputError);
  std::istringstream bad_key("[fit]\nsampels = 1\n");
  EXPECT_THROW(parse_run_config(bad_key), InputError);
  std::istringstream bad_value("[fit]\nthin = zero\n");
  EXPECT_THROW(parse_run_config(bad_value), InputError);
  std::istringstream bad_pair("[fit]\nfixed = delta\n");
  EXPECT_THROW(parse_run_config(bad_pair), InputError);
  std::istringstream bad_thin("[fit]\nthin = 0\n");
  EXPECT_THROW(parse_run_config(bad_thin), InputError);
}

TEST(RunConfigParse, HashIsStable) {
  EXPECT_EQ(config_hash(""), "cbf29ce484222325");
  EXPECT_NE(config_hash("a"), config_hash("b"));
}

TEST_F(CliTest, OutputDirectoryPrecedence) {
  std::istringstream in("[data]\noutput = from_config\n");
  RunConfig c = parse_run_config(in, dir_);
  setenv("SCM_OUTPUT_DIR", (dir_ / "from_env").c_str(), 1);
  apply_overrides(c, {});
  EXPECT_EQ(c.data.output, dir_ / "from_env");
  Overrides o;
  o.output = dir_ / "from_flag";
  o.samples = 7;
  apply_overrides(c, o);
  EXPECT_EQ(c.data.output, dir_ / "from_flag");
  EXPECT_EQ(c.fit.n_samples, 7);
  unsetenv("SCM_OUTPUT_DIR");
}

TEST_F(CliTest, SimulateFitNationalRoundTrip) {
  const fs::path sim = simulate_panel();
  for (const char* f : {"panel.csv", "adjacency.txt", "truth.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(sim / f)) << f;
  }
  const ObservationPanel panel = load_panel(sim / "panel.csv");
  EXPECT_EQ(panel.num_areas(), 4);
  EXPECT_EQ(panel.first_year(), 2001);

  write_fit_config();
  ASSERT_EQ(run({"fit", "-c", (dir_ / "fit.ini").string()}), 0);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "fit_summary.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "hyper_summary.csv"));
  const std::string manifest = slurp(dir_ / "out" / "manifest.json");
  EXPECT_NE(manifest.find("\"config_hash\""), std::string::npos);
  EXPECT_NE(manifest.find("wall_time_seconds"), std::string::npos);

  ASSERT_EQ(run({"national", "-c", (dir_ / "fit.ini").string(), "-o", (dir_ / "nat").string()}), 0);
  const std::string nat = slurp(dir_ / "nat" / "national.csv");
  EXPECT_EQ(nat.substr(0, nat.find('\n')), "year,observed,mean,q025,q975,cil");
  EXPECT_EQ(std::count(nat.begin(), nat.end(), '\n'), 6);

  ASSERT_EQ(run({"fit", "-c", (dir_ / "fit.ini").string(), "--mode", "eb", "-o", (dir_ / "eb").string()}), 0);
  EXPECT_TRUE(fs::exists(dir_ / "eb" / "fit_summary.csv"));
}

TEST_F(CliTest, RepeatedRunsAreByteIdentical) {
  simulate_panel();
  write_fit_config();
  const std::string cfg = (dir_ / "fit.ini").string();
  ASSERT_EQ(run({"national", "-c", cfg, "-o", (dir_ / "a").string()}), 0);
  ASSERT_EQ(run({"national", "-c", cfg, "-o", (dir_ / "b").string()}), 0);
  EXPECT_EQ(slurp(dir_ / "a" / "national.csv"), slurp(dir_ / "b" / "national.csv"));
  ASSERT_EQ(run({"national", "-c", cfg, "-o", (dir_ / "c").string(), "--seed", "12"}), 0);
  EXPECT_NE(slurp(dir_ / "a" / "national.csv"), slurp(dir_ / "c" / "national.csv"));
}

TEST_F(CliTest, FailureExitsNonZeroAndLeavesNoOutputs) {
  simulate_panel();
  write_fit_config("fixed = no_such:1\n");
  std::string err;
  EXPECT_EQ(run({"fit", "-c", (dir_ / "fit.ini").string()}, &err), 1);
  EXPECT_NE(err.find("no_such"), std::string::npos);
  if (fs::exists(dir_ / "out")) {
    EXPECT_TRUE(fs::is_empty(dir_ / "out"));
  }
  write_fit_config();
  EXPECT_EQ(run({"forecast", "-c", (dir_ / "fit.ini").string()}, &err), 1);
  EXPECT_NE(err.find("projected_populations"), std::string::npos);
}

TEST_F(CliTest, MissingConfigIsUsageError) {
  EXPECT_NE(run({"fit"}), 0);
  EXPECT_NE(run({"fit", "-c", (dir_ / "absent.ini").string()}), 0);
}

TEST_F(CliTest, ToolBinaryRuns) {
  spit(dir_ / "sim.ini", "[simulate]\nrows = 2\ncols = 2\nyears = 3\n[data]\noutput = sim\n");
  const std::string cmd = std::string(SCM_TOOL_PATH) + " simulate -c " + (dir_ / "sim.ini").string() + " > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "sim" / "panel.csv"));
}

}  // namespace
}  // namespace scm::cli
