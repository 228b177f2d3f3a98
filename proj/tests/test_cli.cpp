#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HSCLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string data(const std::string& name) {
  return std::string(HSCLAB_TEST_DATA) + "/" + name;
}

fs::path outdir(const std::string& name) {
  fs::path p = fs::path(HSCLAB_TEST_OUT) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json load(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  json j;
  in >> j;
  return j;
}

/// File contents with the timestamp header line removed.
std::string stripped(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.find("generated_at") == std::string::npos) out << line << "\n";
  return out.str();
}

}  // namespace

TEST_CASE("cli scan: positive model exits 0 with the product minimum") {
  const auto out = outdir("scan_f0");
  const int rc = run_cli("scan --config " + data("f0_scan.json") + " --out " + out.string());
  CHECK(rc == 0);
  const json j = load(out / "scan.json");
  CHECK(j.at("schema_version") == 1);
  CHECK(j.at("pass") == true);
  const auto& r = j.at("results").at(0);
  CHECK(std::abs(r.at("global_min_hsc").get<double>() - 1.0) < 1e-6);
  CHECK(std::abs(r.at("pinching").get<double>() - 0.5) < 1e-6);
  CHECK(fs::exists(out / "scan.csv"));
}

TEST_CASE("cli scan: F_2 at lambda 2 fails the Kahler check and exits nonzero") {
  const auto out = outdir("scan_f2_neg");
  const int rc = run_cli("scan --config " + data("f2_lambda2.json") + " --out " + out.string());
  CHECK(rc == 1);
  const json j = load(out / "scan.json");
  CHECK(j.at("results").at(0).at("kahler_ok") == false);
  CHECK(j.at("results").at(0).at("worst_metric_eigenvalue").get<double>() < 1e-9);
}

TEST_CASE("cli scan: identical seed gives identical bytes, jobs do not matter") {
  const auto out1 = outdir("scan_det1");
  const auto out2 = outdir("scan_det2");
  const auto out3 = outdir("scan_det3");
  CHECK(run_cli("scan --config " + data("f0_scan.json") + " --out " + out1.string()) == 0);
  CHECK(run_cli("scan --config " + data("f0_scan.json") + " --out " + out2.string()) == 0);
  CHECK(run_cli("scan --config " + data("f0_scan.json") + " --jobs 2 --out " + out3.string()) ==
        0);
  CHECK(stripped(out1 / "scan.json") == stripped(out2 / "scan.json"));
  CHECK(stripped(out1 / "scan.json") == stripped(out3 / "scan.json"));
  CHECK(stripped(out1 / "scan.csv") == stripped(out2 / "scan.csv"));
  // a different seed changes the report
  const auto out4 = outdir("scan_det4");
  CHECK(run_cli("scan --config " + data("f0_scan.json") + " --seed 999 --out " + out4.string()) ==
        0);
  CHECK(load(out4 / "scan.json").at("seed") == 999);
}

TEST_CASE("cli eval: Fubini-Study H = 2, fiber direction H = 2") {
  {
    const auto out = outdir("eval_p1");
    CHECK(run_cli("eval --config " + data("eval_p1.json") + " --out " + out.string()) == 0);
    const json j = load(out / "eval.json");
    const double h =
        j.at("points").at(0).at("directions").at(0).at("hsc").get<double>();
    CHECK(std::abs(h - 2.0) < 1e-10);
  }
  {
    const auto out = outdir("eval_f2");
    CHECK(run_cli("eval --config " + data("eval_f2.json") + " --out " + out.string()) == 0);
    const json j = load(out / "eval.json");
    const double h =
        j.at("points").at(0).at("directions").at(0).at("hsc").get<double>();
    CHECK(std::abs(h - 2.0) < 1e-10);
  }
}

TEST_CASE("cli certify: manual H0/C record") {
  const auto out = outdir("certify_manual");
  CHECK(run_cli("certify --config " + data("certify_manual.json") + " --out " + out.string()) ==
        0);
  const json j = load(out / "certify.json");
  CHECK(j.at("lambda_star").get<double>() == 0.0);
}

TEST_CASE("cli papercheck: single model all-pass") {
  const auto out = outdir("papercheck_f1");
  CHECK(run_cli("papercheck --config " + data("papercheck_f1.json") + " --out " + out.string()) ==
        0);
  const json j = load(out / "papercheck.json");
  CHECK(j.at("all_pass") == true);
  CHECK(j.at("cases").size() >= 10);
}

TEST_CASE("cli berger: z-score within bounds") {
  const auto out = outdir("berger_f0");
  CHECK(run_cli("berger --config " + data("berger_f0.json") + " --out " + out.string()) == 0);
  const json j = load(out / "berger.json");
  CHECK(std::abs(j.at("z_score").get<double>()) < 4.0);
  CHECK(j.at("std_error").get<double>() > 0.0);
}

TEST_CASE("cli scan: custom model from expression strings") {
  const auto out = outdir("scan_custom");
  const int rc = run_cli("scan --config " + std::string(HSCLAB_CONFIG_DIR) +
                         "/custom_model.json --out " + out.string());
  CHECK(rc == 0);
  const json j = load(out / "scan.json");
  CHECK(j.at("results").at(0).at("global_min_hsc").get<double>() > 0.0);
}

TEST_CASE("cli lambda0: threshold search report") {
  const auto out = outdir("lambda0_f2");
  const int rc = run_cli("lambda0 --config " + data("lambda0_f2.json") + " --out " + out.string());
  CHECK(rc == 0);
  const json j = load(out / "lambda0.json");
  CHECK(j.at("verified") == true);
  const double l0 = j.at("lambda0").get<double>();
  CHECK(l0 > 4.5);
  CHECK(l0 < 7.5);
  CHECK(fs::exists(out / "lambda0.csv"));
}

TEST_CASE("cli: bad config path and parse errors exit 2") {
  CHECK(run_cli("scan --config /nonexistent.json --out /tmp/x") == 2);
  const auto out = outdir("badcfg");
  std::ofstream(out / "bad.json") << "{ not json";
  CHECK(run_cli("scan --config " + (out / "bad.json").string() + " --out " + out.string()) == 2);
}
