#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run_cli(const std::string& args) {
  const std::string cmd = std::string(BADC_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string toy_config() { return std::string(BADC_SOURCE_DIR) + "/configs/toy.json"; }

}  // namespace

TEST(Cli, QuantizeValues) {
  auto r = run_cli("quantize --bits 3 --value 0.40");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("0.400000\t3\t0.437500"), std::string::npos) << r.out;
  r = run_cli("quantize --bits 2 --mask 0x9 --value 0.70");
  EXPECT_NE(r.out.find("0.700000\t3\t0.750000"), std::string::npos) << r.out;
  r = run_cli("quantize --bits 3 --value 1.0");
  EXPECT_NE(r.out.find("1.000000\t7\t"), std::string::npos) << r.out;
}

TEST(Cli, QuantizeSweepRows) {
  const auto r = run_cli("quantize --bits 2 --sweep 5");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 6);
  EXPECT_NE(r.out.find("0.250000\t1\t0.375000"), std::string::npos) << r.out;
}

TEST(Cli, QuantizeErrors) {
  EXPECT_NE(run_cli("quantize --bits 2 --mask 0x1 --value 0.5").code, 0);
  EXPECT_NE(run_cli("quantize --bits 2 --mask zz --value 0.5").code, 0);
  EXPECT_NE(run_cli("quantize --bits 12 --value 0.5").code, 0);
  EXPECT_EQ(run_cli("quantize --bits 3").code, 2);
  EXPECT_EQ(run_cli("quantize --bits 3 --value 0.1 --bogus").code, 2);
  EXPECT_EQ(run_cli("").code, 2);
}

TEST(Cli, AreaQueries) {
  auto r = run_cli("area --bits 3 --kind binary --json");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"transistors\": 45"), std::string::npos) << r.out;
  r = run_cli("area --bits 3 --kind flash --json");
  EXPECT_NE(r.out.find("\"comparators\": 7"), std::string::npos) << r.out;
  r = run_cli("area --bits 2 --kind pruned --mask 0xC --json");
  EXPECT_NE(r.out.find("\"comparators\": 1"), std::string::npos) << r.out;
  EXPECT_EQ(run_cli("area --bits 2 --kind pruned").code, 2);
  r = run_cli("area --bits 3 --kind binary");
  EXPECT_NE(r.out.find("transistors          45"), std::string::npos) << r.out;
}

TEST(Cli, AreaWithCostFile) {
  const fs::path f = fs::temp_directory_path() / "badc_cli_cost.json";
  std::ofstream(f) << R"({"comp_tr": 1, "comp_noinv_tr": 1, "inv_tr": 0, "sel_tr": 0, "amp_tr": 0})";
  const auto r = run_cli("area --bits 3 --kind binary --json --cost " + f.string());
  EXPECT_NE(r.out.find("\"transistors\": 5"), std::string::npos) << r.out;
}

TEST(Cli, Selftest) { EXPECT_EQ(run_cli("selftest").code, 0); }

TEST(Cli, ExploreIsDeterministicAcrossWorkersAndReports) {
  const fs::path a = fs::temp_directory_path() / "badc_cli_a";
  const fs::path b = fs::temp_directory_path() / "badc_cli_b";
  fs::remove_all(a);
  fs::remove_all(b);
  ASSERT_EQ(run_cli("explore --config " + toy_config() + " --out " + a.string() + " --workers 1").code, 0);
  ASSERT_EQ(run_cli("explore --config " + toy_config() + " --out " + b.string() + " --workers 8").code, 0);
  EXPECT_EQ(slurp(a / "pareto.csv"), slurp(b / "pareto.csv"));
  EXPECT_TRUE(fs::exists(a / "models"));

  const auto rep = run_cli("pareto-report --in " + a.string() + " --drop 0.05");
  EXPECT_EQ(rep.code, 0);
  EXPECT_NE(rep.out.find("gain flash->pruned"), std::string::npos) << rep.out;
  EXPECT_TRUE(fs::exists(a / "plotdata.csv"));
  EXPECT_EQ(slurp(a / "plotdata.csv").substr(0, 31), "accuracy,normalized_area,label\n");
}

TEST(Cli, EnvironmentSeedOverride) {
  const fs::path a = fs::temp_directory_path() / "badc_cli_env";
  fs::remove_all(a);
  const std::string cmd = "env BADC_SEED=abc " + std::string(BADC_CLI_PATH) + " explore --config " + toy_config() +
                          " --out " + a.string() + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  EXPECT_EQ(WEXITSTATUS(status), 2);
  EXPECT_FALSE(fs::exists(a));
}

TEST(Cli, MissingDatasetExitsTwoWithoutArtifacts) {
  const fs::path dir = fs::temp_directory_path() / "badc_cli_missing";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"dataset": {"kind": "csv", "path": "nope.csv"}})";
  const fs::path out = dir / "out";
  EXPECT_EQ(run_cli("explore --config " + cfg.string() + " --out " + out.string()).code, 2);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, ReportWithoutQualifyingPointExitsThree) {
  const fs::path dir = fs::temp_directory_path() / "badc_cli_report";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "summary.json") << R"({"adc_bits": 2, "baseline": {"accuracy": 0.95},
    "areas": {"flash_system": {"transistors": 400}, "binary_system": {"transistors": 200}},
    "dataset": {"feature_names": ["a"]}})";
  std::ofstream(dir / "pareto.csv") << "point_id,generation,accuracy,transistor_count,dpos,mask_a\n0,0,0.800000,100,4,f\n";
  const auto r = run_cli("pareto-report --in " + dir.string() + " --drop 0");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("no point within bound"), std::string::npos) << r.out;
  EXPECT_EQ(run_cli("pareto-report --in " + dir.string() + " --drop 0.2").code, 0);
  EXPECT_EQ(run_cli("pareto-report --in /no/such/dir").code, 1);
}
