#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "meta_audit/cli.hpp"
#include "meta_audit/report.hpp"

using namespace meta_audit;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "meta_audit_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write(const std::string& name, const std::string& body) {
  const auto path = scratch(name);
  std::ofstream(path) << body;
  return path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kTable1 = std::string(META_AUDIT_DATA_DIR) + "/table1.csv";

}  // namespace

TEST_CASE("searchspace on table 1") {
  const auto out = scratch("t1.json");
  const auto r = run({"searchspace", "--input", kTable1, "--out", out.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("median=12288 q1=2496 q3=58368") != std::string::npos);
  CHECK(r.out.find("warning") == std::string::npos);
  const auto j = Json::parse(slurp(out));
  CHECK(j["searchspace_summary"]["median"] == 12288);
}

TEST_CASE("searchspace reports printed-table mismatches") {
  const auto in = write("bad_counts.csv",
                        "id,outcomes,predictors,covariates,space3\n"
                        "a,1,2,3,99\n");
  const auto r = run({"searchspace", "--input", in.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("warning: study 'a': computed space3 = 16 but input reports 99") !=
        std::string::npos);
}

TEST_CASE("combine fisher k=1 identity") {
  const auto in = write("one_study.csv", "id,p_value\nonly,0.5\n");
  const auto out = scratch("one.json");
  const auto r = run({"combine", "--method", "fisher", "--input", in.string(), "--out",
                      out.string()});
  CHECK(r.code == 0);
  const auto j = Json::parse(slurp(out));
  CHECK(j["fisher"]["combined_p"].dump() == "0.5");
  CHECK(j["dataset_label"] == "one_study");
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"schema", "dataset_label", "fisher", "warnings"});
}

TEST_CASE("combine reports clamp warnings once") {
  const auto in = write("tiny.csv", "id,p_value\nx,1e-320\ny,0.5\n");
  const auto out = scratch("tiny.json");
  const auto r = run({"combine", "--input", in.string(), "--out", out.string()});
  CHECK(r.code == 0);
  const auto j = Json::parse(slurp(out));
  REQUIRE(j["warnings"].size() == 1);
  CHECK(j["warnings"][0].get<std::string>().find("'x'") != std::string::npos);
}

TEST_CASE("combine dl-random") {
  const auto in = write("dl.csv", "id,effect,se\na,0,1\nb,2,0.5\n");
  const auto out = scratch("dl.json");
  const auto r =
      run({"combine", "--method", "dl-random", "--input", in.string(), "--out", out.string()});
  CHECK(r.code == 0);
  const auto j = Json::parse(slurp(out));
  CHECK(j["dl"]["pooled"].get<double>() == doctest::Approx(1.1875));
  CHECK(j["dl"]["tau2"].get<double>() == doctest::Approx(1.375));
}

TEST_CASE("diagnose writes SVG and report") {
  std::string body = "id,p_value\n";
  for (int i = 1; i <= 10; ++i) body += "h" + std::to_string(i) + "," + std::to_string(0.001 * i) + "\n";
  for (int j = 1; j <= 20; ++j) body += "n" + std::to_string(j) + "," + std::to_string(0.05 + 0.95 * j / 21.0) + "\n";
  const auto in = write("mix.csv", body);
  const auto svg = scratch("mix.svg");
  const auto out = scratch("mix.json");
  const auto r = run({"diagnose", "--input", in.string(), "--svg", svg.string(), "--out",
                      out.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("classification=bilinear_mixture") != std::string::npos);
  CHECK(fs::file_size(svg) > 0);
  CHECK(Json::parse(slurp(out))["diagnostics"]["two_segment"]["breakpoint_rank"] == 10);
}

TEST_CASE("robustness fisher") {
  std::string body = "id,p_value\n";
  for (int i = 0; i < 10; ++i) body += "bg" + std::to_string(i) + ",0.5\n";
  body += "fraud,1e-10\n";
  const auto in = write("fraud.csv", body);
  const auto out = scratch("fraud.json");
  const auto r = run({"robustness", "--input", in.string(), "--out", out.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("drop fraud") != std::string::npos);
  CHECK(r.out.find("verdict flips: 1 of 11") != std::string::npos);
  const auto j = Json::parse(slurp(out));
  CHECK(j["influence"][0]["study_id"] == "fraud");
  CHECK(j["influence"][0]["verdict_flip"] == true);
  CHECK(j.contains("min_flip_pvalue"));
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"combine"}).code == kExitUsage);
  CHECK(run({"combine", "--method", "median", "--input", "x.csv"}).code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);

  const auto missing = run({"combine", "--input", "/no/such/file.csv"});
  CHECK(missing.code == kExitData);
  CHECK(missing.err.find("/no/such/file.csv") != std::string::npos);

  const auto bad = write("bad.csv", "id,p_value\nA,1.5\n");
  const auto invalid = run({"combine", "--input", bad.string()});
  CHECK(invalid.code == kExitData);
  CHECK(invalid.err.find("'A'") != std::string::npos);

  const auto pvals = write("ponly.csv", "id,p_value\nA,0.5\nB,0.2\n");
  const auto no_effects = run({"combine", "--method", "dl-fixed", "--input", pvals.string()});
  CHECK(no_effects.code == kExitData);
  CHECK(no_effects.err.find("'A'") != std::string::npos);

  CHECK(run({"combine", "--alpha", "2", "--input", pvals.string()}).code == kExitUsage);

  const auto huge = write("huge.csv", "id,outcomes,predictors,covariates\nbig,1,1,70\n");
  CHECK(run({"searchspace", "--input", huge.string()}).code == kExitNumeric);

  CHECK(run({"simulate", "--k", "2", "--rho", "0", "--alpha", "1e-300", "--reps", "1"}).code ==
        kExitNumeric);
  CHECK(run({"simulate", "--rho", "3"}).code == kExitUsage);
}

TEST_CASE("simulate is byte-identical across runs and thread counts") {
  const auto a = scratch("sim_a.json");
  const auto b = scratch("sim_b.json");
  setenv("META_AUDIT_THREADS", "1", 1);
  CHECK(run({"simulate", "--k", "20", "--reps", "100", "--seed", "7", "--out", a.string()}).code == 0);
  setenv("META_AUDIT_THREADS", "4", 1);
  CHECK(run({"simulate", "--k", "20", "--reps", "100", "--seed", "7", "--out", b.string()}).code == 0);
  unsetenv("META_AUDIT_THREADS");
  CHECK(slurp(a) == slurp(b));
  const auto j = Json::parse(slurp(a));
  CHECK(j["config"]["seed"] == 7);
  CHECK(j["result"]["replicates_run"] == 100);
}

TEST_CASE("simulate config file with flag overrides") {
  const auto cfg = write("sim.cfg", "k=5\nreps=50\nseed=3\nrho=0.5\n");
  const auto out = scratch("sim_cfg.json");
  const auto r = run({"simulate", "--config", cfg.string(), "--seed", "4", "--out", out.string()});
  CHECK(r.code == 0);
  const auto j = Json::parse(slurp(out));
  CHECK(j["config"]["k_studies"] == 5);
  CHECK(j["config"]["replicates"] == 50);
  CHECK(j["config"]["seed"] == 4);
  CHECK(j["config"]["pub_bias_rho"] == 0.5);

  const auto bad = write("bad.cfg", "k=5\nwhat=1\n");
  const auto br = run({"simulate", "--config", bad.string()});
  CHECK(br.code == kExitData);
  CHECK(br.err.find("bad.cfg") != std::string::npos);
}
