#include "doctest.h"

#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
};

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("varcvx-cli-" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  fs::path capture = work_dir() / ("stdout-" + std::to_string(counter++) + ".txt");
  std::string cmd = std::string(VARCVX_CLI_PATH) + " " + args + " > " + capture.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  CliResult r;
  if (status != -1 && WIFEXITED(status)) r.code = WEXITSTATUS(status);
  std::ifstream in(capture);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string write_spec(const std::string& name, const json& j) {
  fs::path p = work_dir() / name;
  std::ofstream out(p);
  out << j.dump(2);
  return p.string();
}

json gallery_spec(const std::string& id, const json& check) {
  json j{{"schema", 1},
         {"kind", id.rfind("nlp-", 0) == 0 ? "nlp" : "function"},
         {"gallery_id", id},
         {"ref_point", {0.0}},
         {"ref_subgradient", {0.0}}};
  if (!check.is_null()) j["check"] = check;
  return j;
}

}  // namespace

TEST_CASE("check-vc exit codes track the verdict") {
  auto ok = run_cli("check-vc --spec " +
                    write_spec("l0.json", gallery_spec("l0", {{"modulus", 0.0}})));
  CHECK(ok.code == 0);
  json rep = json::parse(ok.out);
  CHECK(rep["command"] == "check-vc");
  CHECK(rep["verdicts"][0]["label"] == "variational-convexity");
  CHECK(rep["verdicts"][0]["verdict"]["status"] == "holds");

  auto bad = run_cli("check-vc --spec " +
                     write_spec("dl.json", gallery_spec("dl-counterexample", nullptr)));
  CHECK(bad.code == 1);
  json brep = json::parse(bad.out);
  CHECK(brep["verdicts"][0]["verdict"]["status"] == "fails");
}

TEST_CASE("check-svc requires and applies a positive modulus") {
  auto good = run_cli("check-svc --spec " +
                      write_spec("q2.json", gallery_spec("quad(2)", {{"modulus", 2.0}})));
  CHECK(good.code == 0);

  auto over = run_cli("check-svc --spec " +
                      write_spec("q25.json", gallery_spec("quad(2)", {{"modulus", 2.5}})));
  CHECK(over.code == 1);

  auto missing = run_cli("check-svc --spec " +
                         write_spec("q0.json", gallery_spec("quad(2)", {{"modulus", 0.0}})));
  CHECK(missing.code == 3);
  json err = json::parse(missing.out);
  CHECK(err["error"]["code"] == "SpecInvalid");
}

TEST_CASE("check-nlp reports the curvature pairing and failure modes") {
  auto ok = run_cli("check-nlp --spec " +
                    write_spec("nq.json", gallery_spec("nlp-quad-ineq", {{"name", "pointbased"}})));
  CHECK(ok.code == 0);
  json rep = json::parse(ok.out);
  CHECK(rep["sigma"] == 2.0);
  CHECK(rep["kappa"] == 0.5);
  CHECK(rep["kkt"]["y"][0] == 0.0);
  bool saw_licq = false, saw_plicq = false, saw_point = false;
  for (const auto& v : rep["verdicts"]) {
    saw_licq |= v["label"] == "licq";
    saw_plicq |= v["label"] == "plicq";
    saw_point |= v["label"] == "pointbased";
  }
  CHECK(saw_licq);
  CHECK(saw_plicq);
  CHECK(saw_point);

  auto bad = run_cli("check-nlp --spec " +
                     write_spec("ni.json", gallery_spec("nlp-indefinite", nullptr)));
  CHECK(bad.code == 1);

  auto deg = run_cli("check-nlp --spec " +
                     write_spec("nd.json", gallery_spec("nlp-degenerate-licq", nullptr)));
  CHECK(deg.code == 3);
  json drep = json::parse(deg.out);
  CHECK(drep["error"]["code"] == "LicqFailed");
  CHECK(drep["verdicts"][0]["verdict"]["status"] == "fails");
}

TEST_CASE("check-nlp runs the sampled modes behind the same spec") {
  auto nb = run_cli("check-nlp --spec " +
                    write_spec("nb.json", gallery_spec("nlp-quad-ineq",
                                                       {{"name", "neighborhood"},
                                                        {"modulus", 2.0}})));
  CHECK(nb.code == 0);
  json rep = json::parse(nb.out);
  bool saw = false;
  for (const auto& v : rep["verdicts"]) saw |= v["label"] == "neighborhood";
  CHECK(saw);

  auto tl = run_cli("check-nlp --spec " +
                    write_spec("tl.json", gallery_spec("nlp-quad-ineq", {{"name", "tilt"}})));
  CHECK(tl.code == 0);
}

TEST_CASE("envelope-scan writes a parseable envelope table") {
  fs::path csv = work_dir() / "abs-scan.csv";
  json spec = gallery_spec("abs", {{"lambda_list", {0.5}}, {"window", 1.0}});
  auto r = run_cli("envelope-scan --csv " + csv.string() + " --spec " +
                   write_spec("scan.json", spec));
  CHECK(r.code == 0);
  json rep = json::parse(r.out);
  CHECK(rep["rows"] == 401);

  std::ifstream in(csv);
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header == "lambda,x0,envelope,grad0,curvature");
  std::string line;
  int rows = 0;
  double max_err = 0.0;
  double curv_at_zero = -1.0;
  while (std::getline(in, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    REQUIRE(vals.size() == 5);
    double x = vals[1];
    double huber = std::abs(x) <= 0.5 ? x * x : std::abs(x) - 0.25;
    max_err = std::max(max_err, std::abs(vals[2] - huber));
    if (std::abs(x) < 1e-9) curv_at_zero = vals[4];
    if (std::abs(x - 0.75) < 1e-9) CHECK(vals[3] == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(rows == 401);
  CHECK(max_err < 1e-12);
  CHECK(curv_at_zero == doctest::Approx(2.0));
}

TEST_CASE("gallery runs are reproducible under a fixed seed") {
  auto a = run_cli("gallery --id abs --seed 3");
  auto b = run_cli("gallery --id abs --seed 3");
  CHECK(a.code == 0);
  CHECK(b.code == 0);
  json ja = json::parse(a.out);
  json jb = json::parse(b.out);
  ja.erase("wall_time_seconds");
  jb.erase("wall_time_seconds");
  CHECK(ja.dump() == jb.dump());
  for (const auto& f : ja["facts"]) CHECK(f["reproduced"] == true);
}

TEST_CASE("argument and spec errors exit with code 3") {
  CHECK(run_cli("").code == 3);
  CHECK(run_cli("frobnicate").code == 3);
  CHECK(run_cli("check-vc").code == 3);

  fs::path garbled = work_dir() / "garbled.json";
  std::ofstream(garbled) << "this is not json";
  auto r = run_cli("check-vc --spec " + garbled.string());
  CHECK(r.code == 3);
  CHECK(json::parse(r.out)["error"]["code"] == "SpecInvalid");

  auto unknown = run_cli("check-vc --spec " +
                         write_spec("unknown.json", gallery_spec("no-such", nullptr)));
  CHECK(unknown.code == 3);
  CHECK(json::parse(unknown.out)["error"]["code"] == "UnknownId");

  auto help = run_cli("--help");
  CHECK(help.code == 0);
}
