#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pinlab/cli.hpp"
#include "pinlab/errors.hpp"
#include "pinlab/serialize.hpp"

namespace {

using namespace pinlab;
namespace fs = std::filesystem;

// Fresh per-case scratch directory under the system temp root.
fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "pinlab_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
  REQUIRE(static_cast<bool>(f));
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(static_cast<bool>(f));
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

// Message of the ConfigInvalid thrown by parsing `text` (fails if none).
std::string parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigInvalid& e) {
    return e.what();
  }
  FAIL("expected ConfigInvalid");
  return {};
}

ExperimentConfig quick_config(const std::string& json, const fs::path& out) {
  ExperimentConfig cfg = parse_config(json);
  cfg.out_dir = out.string();
  return cfg;
}

// Runs the installed binary (location exported by the build) and returns its
// exit code; stdout/stderr go to a log file inside `dir`.
int run_binary(const std::string& args, const fs::path& dir) {
  const char* bin = std::getenv("PINLAB_BIN");
  REQUIRE_MESSAGE(bin != nullptr,
                  "PINLAB_BIN must point at the built binary (set by ctest)");
  const std::string cmd = std::string("\"") + bin + "\" " + args + " > \"" +
                          (dir / "run.log").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing applies defaults and validates values") {
  const ExperimentConfig cfg = parse_config(
      R"({"command":"partition","alpha":0.5,"beta":1.25,"h":-0.5,"N":48,
          "seed":9,"construction":"B","tolerances":{"table_spot":1e-8}})");
  CHECK(cfg.command == "partition");
  CHECK(cfg.alpha == 0.5);
  CHECK(cfg.tilde_alpha == 1.5);  // default
  CHECK(cfg.beta == 1.25);
  CHECK(cfg.h == -0.5);
  CHECK(cfg.N == 48);
  CHECK(cfg.seed == 9);
  CHECK(cfg.construction == "B");
  CHECK(cfg.tolerances.at("table_spot") == 1e-8);
  CHECK(cfg.out_dir == "out");
  CHECK(cfg.workers == 1);

  // Rejections carry the offending key (or tolerance) by name.
  CHECK(parse_error(R"({"alpha":0.5})").find("command") != std::string::npos);
  CHECK(parse_error(R"({"command":"nope"})").find("one of") !=
        std::string::npos);
  CHECK(parse_error(R"({"command":"partition","a_lo":3})").find("a_lo") !=
        std::string::npos);
  CHECK(parse_error(R"({"command":"partition","alpha":1.0})").find("alpha") !=
        std::string::npos);
  CHECK(parse_error(R"({"command":"partition","alpha":-2})").find("alpha") !=
        std::string::npos);
  CHECK(parse_error(R"({"command":"partition","tilde_alpha":1.0})")
            .find("tilde_alpha") != std::string::npos);
  CHECK(parse_error(R"({"command":"partition","beta":-0.1})").find("beta") !=
        std::string::npos);
  CHECK(parse_error(R"({"command":"partition","N":0})").find("N") !=
        std::string::npos);
  CHECK(parse_error(R"({"command":"partition","N":65537})").find("N") !=
        std::string::npos);
  CHECK(parse_error(R"({"command":"partition","N":64,"horizon":32})")
            .find("horizon") != std::string::npos);
  CHECK(parse_error(R"({"command":"partition","h":90,"beta":20})")
            .find("100") != std::string::npos);
  CHECK(parse_error(
            R"({"command":"partition","tolerances":{"table_spot":0}})")
            .find("table_spot") != std::string::npos);
  CHECK(parse_error(R"({"command":"free-energy","replicas":0})")
            .find("replicas") != std::string::npos);
  CHECK(parse_error(R"({"command":"contacts","N":16,"a_max":17})")
            .find("a_max") != std::string::npos);
  CHECK(parse_error(R"({"command":"tail-fit","N":64,"a_lo":4,"a_hi":6})")
            .find("a_hi") != std::string::npos);
  CHECK(parse_error(R"({"command":"renewal-check"})").find("h") !=
        std::string::npos);
  CHECK(parse_error(R"({"command":"renewal-check","h":0.1,"sizes":[5]})")
            .find("sizes") != std::string::npos);
  CHECK(parse_error(R"({"command":"sweep"})").find("h_grid") !=
        std::string::npos);
  CHECK(parse_error(R"({"command":"sweep","h_grid":[0.1,0.2,0.4]})")
            .find("h_grid") != std::string::npos);
  CHECK(parse_error(R"({"command":"sweep","h_grid":[0.1,0.2,0.3,0.4]})")
            .find("log-spaced") != std::string::npos);
  CHECK(parse_error(R"({"command":"sweep","h_grid":[0.1,0.4,0.2,0.8]})")
            .find("increasing") != std::string::npos);
  CHECK(parse_error(R"({"command":"env-gen","construction":"C"})")
            .find("construction") != std::string::npos);
  CHECK(parse_error("not json at all").find("JSON") != std::string::npos);
  CHECK(parse_error("[1,2,3]").find("object") != std::string::npos);
}

TEST_CASE("log-spaced grids are accepted with float-level slack") {
  std::vector<double> grid;
  for (int i = 0; i < 8; ++i)
    grid.push_back(0.01 * std::pow(10.0, i / 7.0));
  Json j;
  j["command"] = "sweep";
  j["h_grid"] = grid;
  j["N"] = 32;
  j["replicas"] = 1;
  const ExperimentConfig cfg = parse_config(j.dump());
  CHECK(cfg.h_grid.size() == 8);
}

TEST_CASE("config hash tracks numeric identity only") {
  const std::string base =
      R"({"command":"sweep","alpha":1.5,"h_grid":[0.01,0.1,1.0,10.0],
          "N":64,"replicas":2,"seed":3})";
  ExperimentConfig a = parse_config(base);
  ExperimentConfig b = parse_config(base);
  b.out_dir = "elsewhere";
  b.workers = 7;
  b.limit_points = 1;
  b.tolerances["exponent_band"] = 0.5;
  b.fit_h_min = 0.05;
  CHECK(config_hash(a) == config_hash(b));

  ExperimentConfig c = parse_config(base);
  c.seed = 4;
  CHECK(config_hash(a) != config_hash(c));
  ExperimentConfig d = parse_config(base);
  d.alpha = 0.5;
  CHECK(config_hash(a) != config_hash(d));
  ExperimentConfig e = parse_config(base);
  e.h_grid.back() = 5.0;
  CHECK(config_hash(a) != config_hash(e));
}

TEST_CASE("doubles are serialized round-trip exact and fail closed") {
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0, -0.0}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK_THROWS_AS(format_double(std::nan("")), Error);
  CHECK_THROWS_AS(format_double(HUGE_VAL), Error);
}

TEST_CASE("estimate JSON round trip is bitwise") {
  FreeEnergyEstimate est;
  est.h = 0.037;
  est.beta = 1.5;
  est.N = 512;
  est.replicas = 3;
  est.mean_log_Z_pinned_over_N = -1.0 / 7.0;
  est.stderr_of_mean = 2.5e-217;
  est.per_replica = {-0.1428, -0.1429, 1.0 / 3.0};
  const FreeEnergyEstimate back = estimate_from_json(estimate_to_json(est));
  CHECK(back.h == est.h);
  CHECK(back.beta == est.beta);
  CHECK(back.N == est.N);
  CHECK(back.replicas == est.replicas);
  CHECK(back.mean_log_Z_pinned_over_N == est.mean_log_Z_pinned_over_N);
  CHECK(back.stderr_of_mean == est.stderr_of_mean);
  CHECK(back.per_replica == est.per_replica);

  Json j = estimate_to_json(est);
  j.erase("per_replica");
  CHECK_THROWS_AS(estimate_from_json(j), Error);
  j = estimate_to_json(est);
  j["replicas"] = 5;
  CHECK_THROWS_AS(estimate_from_json(j), Error);
}

TEST_CASE("report orders failures first and aggregates the verdict") {
  CHECK(emit_report({}).find("no checks were run") != std::string::npos);

  ResultRecord good;
  good.config = parse_config(R"({"command":"verify"})");
  CheckResult ok;
  ok.name = "alpha-check";
  ok.pass = true;
  good.checks = {ok};
  good.all_pass = true;

  ResultRecord bad;
  bad.config = parse_config(R"({"command":"contacts","N":8})");
  CheckResult fail_enforced;
  fail_enforced.name = "broken-check";
  fail_enforced.pass = false;
  CheckResult pass_second;
  pass_second.name = "fine-check";
  pass_second.pass = true;
  bad.checks = {pass_second, fail_enforced};
  bad.all_pass = false;

  const std::string md = emit_report({good, bad});
  CHECK(md.find("Overall: **FAIL**") != std::string::npos);
  CHECK(md.find("2/3 enforced checks passed") != std::string::npos);
  // Failing record's section precedes the passing record's section.
  CHECK(md.find("Contact-count law") < md.find("Invariant suite"));
  // Within the failing section the failing check row comes first.
  CHECK(md.find("broken-check") < md.find("fine-check"));
  // The appendix lists every check in input order.
  CHECK(md.find("record,command,check,enforced,pass,measured,bound,margin") !=
        std::string::npos);

  // Advisory failures do not flip the verdict.
  ResultRecord advisory = good;
  CheckResult soft;
  soft.name = "soft-check";
  soft.pass = false;
  soft.enforced = false;
  advisory.checks.push_back(soft);
  const std::string md2 = emit_report({advisory});
  CHECK(md2.find("Overall: **PASS**") != std::string::npos);
  CHECK(md2.find("FAIL (advisory)") != std::string::npos);
}

TEST_CASE("environment generation round-trips through its own files") {
  const fs::path dir = scratch("envgen");
  const ResultRecord rec = run(quick_config(
      R"({"command":"env-gen","N":200,"seed":7,"construction":"B"})", dir));
  CHECK(rec.all_pass);
  CHECK(fs::exists(dir / "environment.env"));
  CHECK(fs::exists(dir / "record.json"));
  CHECK(fs::exists(dir / "report.md"));
  const std::string csv = read_text(dir / "environment.csv");
  CHECK(csv.rfind("site,value\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 201);  // header + N rows
  const Json record = Json::parse(read_text(dir / "record.json"));
  CHECK(record.at("tool") == "pinlab");
  CHECK(record.at("all_pass") == true);
  CHECK(record.at("outputs").at("length") == 200);
  CHECK(read_text(dir / "report.md").find("Disorder environment generation") !=
        std::string::npos);
}

TEST_CASE("partition and contacts commands pass their structural checks") {
  const fs::path dir1 = scratch("partition");
  const ResultRecord rec1 = run(quick_config(
      R"({"command":"partition","alpha":0.5,"beta":1.0,"h":0.3,"N":40,
          "seed":11})", dir1));
  CHECK(rec1.all_pass);
  const std::string csv1 = read_text(dir1 / "partition.csv");
  CHECK(csv1.rfind("n,log_z_pinned\n", 0) == 0);
  CHECK(std::count(csv1.begin(), csv1.end(), '\n') == 42);  // header + N + 1

  const fs::path dir2 = scratch("contacts");
  const ResultRecord rec2 = run(quick_config(
      R"({"command":"contacts","alpha":1.5,"beta":0.5,"h":-0.2,"N":48,
          "a_max":12,"seed":3})", dir2));
  CHECK(rec2.all_pass);
  const Json record = Json::parse(read_text(dir2 / "record.json"));
  CHECK(record.at("outputs").at("contacts").at("scale") == "linear");
  const double captured =
      record.at("outputs").at("captured_mass").get<double>();
  const double overflow = record.at("outputs")
                              .at("contacts")
                              .at("overflow_mass")
                              .get<double>();
  CHECK(std::fabs(captured + overflow - 1.0) <= 1e-9);
}

TEST_CASE("free-energy command checks ceilings and writes replica values") {
  const fs::path dir = scratch("freeenergy");
  const ResultRecord rec = run(quick_config(
      R"({"command":"free-energy","alpha":1.5,"beta":0.7,"h":0.4,"N":64,
          "replicas":3,"seed":21})", dir));
  CHECK(rec.all_pass);
  const std::string csv = read_text(dir / "replicas.csv");
  CHECK(csv.rfind("replica,value\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const Json record = Json::parse(read_text(dir / "record.json"));
  CHECK(record.at("outputs").at("estimate").at("replicas") == 3);
  CHECK(record.at("outputs").contains("homogeneous_free_energy"));
}

TEST_CASE("check filter narrows enforcement and rejects unknown names") {
  const fs::path dir = scratch("filter");
  ExperimentConfig cfg = quick_config(
      R"({"command":"contacts","alpha":1.5,"h":0.1,"N":32,"a_max":8})", dir);
  cfg.check_filter = {"mass-accounting"};
  const ResultRecord rec = run(cfg);
  for (const CheckResult& c : rec.checks)
    CHECK(c.enforced == (c.name == "mass-accounting"));

  cfg.check_filter = {"not-a-check"};
  CHECK_THROWS_AS(run(cfg), ConfigInvalid);
}

TEST_CASE("verify command passes every invariant") {
  const fs::path dir = scratch("verify");
  const ResultRecord rec = run(quick_config(R"({"command":"verify"})", dir));
  CHECK(rec.all_pass);
  CHECK(rec.checks.size() >= 12);
  for (const CheckResult& c : rec.checks) {
    CAPTURE(c.name);
    CHECK(c.pass);
  }
  CHECK(read_text(dir / "report.md").find("Invariant suite") !=
        std::string::npos);
}

TEST_CASE("sweep resumes from its manifest and matches an unbroken run") {
  // Rewards clear the coupling by a wide margin so the per-point means sit
  // firmly above zero and rise step over step at this modest size.
  std::vector<double> grid(5);
  for (int i = 0; i < 5; ++i) grid[i] = 0.8 * std::pow(2.0, 0.5 * i);
  Json base;
  base["command"] = "sweep";
  base["alpha"] = 1.5;
  base["beta"] = 0.5;
  base["h_grid"] = grid;
  base["N"] = 48;
  base["replicas"] = 2;
  base["seed"] = 5;

  // Uninterrupted reference run.
  const fs::path full_dir = scratch("sweep_full");
  const ResultRecord full = run(quick_config(base.dump(), full_dir));
  CHECK(full.all_pass);
  const std::string full_curve = read_text(full_dir / "curve.csv");
  CHECK(full_curve.rfind("h,mean,stderr,N,R,seed\n", 0) == 0);
  CHECK(std::count(full_curve.begin(), full_curve.end(), '\n') == 6);

  // Interrupted run: two points per invocation.
  const fs::path part_dir = scratch("sweep_partial");
  Json limited = base;
  limited["limit_points"] = 2;
  ExperimentConfig cfg_limited = quick_config(limited.dump(), part_dir);
  CHECK_THROWS_AS(run(cfg_limited), SweepIncomplete);
  CHECK(fs::exists(part_dir / "sweep_manifest.json"));
  CHECK_FALSE(fs::exists(part_dir / "curve.csv"));
  CHECK_THROWS_AS(run(cfg_limited), SweepIncomplete);  // 4 of 5 done

  // Finishing run without the limit completes the remaining point only.
  const ResultRecord resumed = run(quick_config(base.dump(), part_dir));
  CHECK(resumed.all_pass);
  CHECK(read_text(part_dir / "curve.csv") == full_curve);

  // A foreign manifest (different numeric identity) is ignored, not adopted.
  const fs::path fresh_dir = scratch("sweep_foreign");
  Json other = base;
  other["seed"] = 6;
  run(quick_config(other.dump(), fresh_dir));
  const ResultRecord refreshed = run(quick_config(base.dump(), fresh_dir));
  CHECK(read_text(fresh_dir / "curve.csv") == full_curve);
  CHECK(refreshed.all_pass);
}

TEST_CASE("worker count never changes the numbers") {
  Json base;
  base["command"] = "sweep";
  base["alpha"] = 0.5;
  base["beta"] = 1.0;
  base["h_grid"] = {0.1, 0.2, 0.4, 0.8};
  base["N"] = 40;
  base["replicas"] = 3;
  base["seed"] = 13;

  const fs::path dir1 = scratch("workers1");
  ExperimentConfig cfg1 = quick_config(base.dump(), dir1);
  cfg1.workers = 1;
  run(cfg1);

  const fs::path dir2 = scratch("workers2");
  ExperimentConfig cfg2 = quick_config(base.dump(), dir2);
  cfg2.workers = 2;
  run(cfg2);

  CHECK(read_text(dir1 / "curve.csv") == read_text(dir2 / "curve.csv"));
  const Json r1 = Json::parse(read_text(dir1 / "record.json"));
  const Json r2 = Json::parse(read_text(dir2 / "record.json"));
  CHECK(r1.at("outputs") == r2.at("outputs"));
  CHECK(r1.at("checks") == r2.at("checks"));
}

TEST_CASE("binary: verify exits 0 and rerun is byte-stable") {
  const fs::path dir = scratch("bin_verify");
  write_text(dir / "cfg.json", R"({"command":"verify","seed":2})");
  const std::string args = "--config \"" + (dir / "cfg.json").string() +
                           "\" --out \"" + (dir / "out").string() + "\"";
  CHECK(run_binary(args, dir) == 0);
  const Json record = Json::parse(read_text(dir / "out" / "record.json"));
  CHECK(record.at("all_pass") == true);
  CHECK(record.at("version") == kToolVersion);
  const std::string first_checks = read_text(dir / "out" / "checks.csv");

  CHECK(run_binary(args, dir) == 0);
  CHECK(read_text(dir / "out" / "checks.csv") == first_checks);
}

TEST_CASE("binary: config and usage errors exit 2") {
  const fs::path dir = scratch("bin_errors");
  write_text(dir / "bad_alpha.json",
             R"({"command":"partition","alpha":1.0,"N":16})");
  CHECK(run_binary("--config \"" + (dir / "bad_alpha.json").string() +
                       "\" --out \"" + (dir / "o1").string() + "\"",
                   dir) == 2);
  CHECK(read_text(dir / "run.log").find("alpha") != std::string::npos);

  write_text(dir / "ok.json", R"({"command":"verify"})");
  CHECK(run_binary("--config \"" + (dir / "ok.json").string() +
                       "\" --check not-a-check --out \"" +
                       (dir / "o2").string() + "\"",
                   dir) == 2);
  CHECK(run_binary("", dir) == 2);  // missing required --config
  CHECK(run_binary("--version", dir) == 0);
}

TEST_CASE("binary: failed enforced check exits 1 but still writes outputs") {
  const fs::path dir = scratch("bin_fail");
  // An honest failure: demand a slope match far tighter than the finite-size
  // drift of the mean-contact growth on small sizes.
  write_text(dir / "cfg.json",
             R"({"command":"renewal-check","alpha":1.5,"h":0.2,
                 "sizes":[50,100,200,400],
                 "tolerances":{"scaling_slope":1e-12}})");
  CHECK(run_binary("--config \"" + (dir / "cfg.json").string() +
                       "\" --out \"" + (dir / "out").string() + "\"",
                   dir) == 1);
  const Json record = Json::parse(read_text(dir / "out" / "record.json"));
  CHECK(record.at("all_pass") == false);
  CHECK(read_text(dir / "out" / "report.md").find("Overall: **FAIL**") !=
        std::string::npos);
}

TEST_CASE("binary: interrupted sweep exits 3 and resume completes") {
  const fs::path dir = scratch("bin_sweep");
  std::vector<double> grid(4);
  for (int i = 0; i < 4; ++i) grid[i] = 0.8 * std::pow(2.0, 0.5 * i);
  Json cfg;
  cfg["command"] = "sweep";
  cfg["alpha"] = 1.5;
  cfg["beta"] = 0.5;
  cfg["h_grid"] = grid;
  cfg["N"] = 32;
  cfg["replicas"] = 2;
  cfg["seed"] = 8;
  Json limited = cfg;
  limited["limit_points"] = 3;
  write_text(dir / "limited.json", limited.dump());
  write_text(dir / "full.json", cfg.dump());

  const std::string out = (dir / "out").string();
  CHECK(run_binary("--config \"" + (dir / "limited.json").string() +
                       "\" --out \"" + out + "\"",
                   dir) == 3);
  CHECK(fs::exists(dir / "out" / "sweep_manifest.json"));
  CHECK_FALSE(fs::exists(dir / "out" / "curve.csv"));

  CHECK(run_binary("--config \"" + (dir / "full.json").string() +
                       "\" --out \"" + out + "\"",
                   dir) == 0);
  const std::string resumed = read_text(dir / "out" / "curve.csv");

  const std::string out2 = (dir / "out2").string();
  CHECK(run_binary("--config \"" + (dir / "full.json").string() +
                       "\" --out \"" + out2 + "\"",
                   dir) == 0);
  CHECK(read_text(dir / "out2" / "curve.csv") == resumed);
}

}  // TEST_SUITE("cli")
