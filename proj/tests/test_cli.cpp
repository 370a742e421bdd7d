#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "pinchlab/cli.hpp"

using namespace pinchlab;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"pinchlab"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream is(s);
  for (std::string line; std::getline(is, line);) v.push_back(line);
  return v;
}

std::vector<double> fields(const std::string& line) {
  std::vector<double> v;
  std::istringstream is(line);
  for (std::string cell; std::getline(is, cell, ',');) v.push_back(std::stod(cell));
  return v;
}

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "pinchlab_cli_test";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("build writes the profile and it loads back") {
  const fs::path file = scratch_dir() / "m.json";
  fs::remove(file);
  const auto b = run({"build", "--model", "family", "--n", "10", "--eps", "0.8", "--delta", "0.02",
                      "--out", file.c_str()});
  CHECK(b.code == kExitPass);
  REQUIRE(fs::exists(file));
  std::ifstream in(file);
  const auto j = nlohmann::json::parse(in);
  CHECK(j["L"].get<double>() == doctest::Approx(1.933495408).epsilon(1e-9));

  // the loaded model reproduces the builtin's report
  const auto from = run({"pinch", "--from", file.c_str(), "--eps", "0.8"});
  const auto builtin = run({"pinch", "--model", "family", "--n", "10", "--eps", "0.8", "--delta",
                            "0.02"});
  CHECK(from.code == kExitPass);
  CHECK(nlohmann::json::parse(from.out)["margins"] ==
        nlohmann::json::parse(builtin.out)["margins"]);
}

TEST_CASE("invalid input exits 2 with usage on the error stream") {
  const auto bad = run({"pinch", "--bogus"});
  CHECK(bad.code == kExitInvalid);
  CHECK(bad.out.empty());
  CHECK(bad.err.find("--bogus") != std::string::npos);
  CHECK(bad.err.find("Usage") != std::string::npos);

  CHECK(run({"frobnicate"}).code == kExitInvalid);
  CHECK(run({"pinch", "--model", "family", "--n", "10", "--eps", "-1", "--delta", "0.02"}).code ==
        kExitInvalid);
  CHECK(run({"pinch", "--model", "family", "--n", "10", "--eps", "1.0", "--delta", "0.02"}).code ==
        kExitInvalid);
  CHECK(run({"pinch", "--model", "torus", "--n", "3"}).code == kExitInvalid);
  CHECK(run({"build", "--from", "/nonexistent/m.json"}).code == kExitInvalid);
}

TEST_CASE("Gaussian pinch report passes") {
  const auto r = run({"pinch", "--model", "gaussian", "--n", "3", "--eps", "0.5", "--mode", "ricci"});
  CHECK(r.code == kExitPass);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["pass"] == true);
  CHECK(j["violations"].empty());
  CHECK(j["margins"]["achieved_lower"]["value"].get<double>() == doctest::Approx(1.0));
  CHECK(j["resolution"]["grid"] == 10000);
  CHECK(j["tolerances"]["integrator"] == 1e-10);
  CHECK(j["tolerances"]["distance"] == 1e-6);
}

TEST_CASE("violations exit 1 and only then") {
  const auto r = run({"pinch", "--model", "family", "--n", "3", "--eps", "0.9", "--delta", "0.02"});
  CHECK(r.code == kExitViolations);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["pass"] == false);
  REQUIRE(!j["violations"].empty());
  CHECK(j["violations"][0]["quantity"] == "bakry_tt");
}

TEST_CASE("family-limit table converges toward pi/eps") {
  const auto r = run({"family-limit", "--n", "10", "--eps", "0.8", "--deltas", "0.08,0.04,0.02,0.01"});
  CHECK(r.code == kExitPass);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] ==
        "delta,half_length,L_delta,pi_over_eps,inj_p,lower_margin,upper_margin,pinch_pass");
  double prev_gap = INFINITY;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto v = fields(rows[i]);
    REQUIRE(v.size() == 8);
    const double gap = v[3] - v[2];
    CHECK(v[3] == doctest::Approx(3.926991).epsilon(1e-6));
    CHECK(gap >= 0.0);
    CHECK(gap <= 7 * v[0]);
    CHECK(gap < prev_gap);
    CHECK(v[4] == doctest::Approx(v[2]).epsilon(1e-9));
    CHECK(v[7] == 1.0);
    prev_gap = gap;
  }
}

TEST_CASE("identical arguments give byte-identical output") {
  for (auto args : {std::initializer_list<const char*>{"pinch", "--model", "family", "--n", "10",
                                                       "--eps", "0.8", "--delta", "0.02"},
                    std::initializer_list<const char*>{"gap", "--model", "family", "--n", "10",
                                                       "--eps", "0.8", "--delta", "0.02"}}) {
    const auto a = run(args), b = run(args);
    CHECK(a.code == b.code);
    CHECK(a.out == b.out);
  }
}

TEST_CASE("curvature CSV and geodesic CSV") {
  const auto c = run({"curvature", "--model", "sphere", "--n", "3", "--grid", "100"});
  CHECK(c.code == kExitPass);
  const auto rows = lines(c.out);
  REQUIRE(rows.size() >= 101);
  CHECK(fields(rows[1]).size() == 17);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto v = fields(rows[i]);
    CHECK(std::abs(v[7] - 1.0) <= 1e-12);  // sec_rad
  }

  const auto g = run({"geodesic", "--model", "sphere", "--n", "3", "--r0", "1", "--alpha", "0.7",
                      "--length", "2"});
  CHECK(g.code == kExitPass);
  const auto path = lines(g.out);
  CHECK(path[0] == "t,r,theta,rdot,clairaut_residual,speed_residual");
  const auto last = fields(path.back());
  CHECK(last[0] == doctest::Approx(2.0));
  CHECK(last[4] <= 1e-8);
}

TEST_CASE("index JSON for a sphere arc past the conjugate point") {
  const auto r = run({"index", "--model", "sphere", "--n", "3", "--r0", "0", "--alpha", "0",
                      "--length", "4.71238898038469"});
  CHECK(r.code == kExitPass);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["index"] == 2);
  CHECK(j["eigen_count_index"] == 2);
  CHECK(j["cross_check_agree"] == true);
  CHECK(j["conjugate_points"][0].get<double>() == doctest::Approx(M_PI).epsilon(1e-8));
}

TEST_CASE("klingenberg and gap reports") {
  const auto k = run({"klingenberg", "--model", "family", "--n", "10", "--eps", "0.8", "--delta",
                      "0.02", "--loop-length", "3"});
  CHECK(k.code == kExitPass);
  const auto kj = nlohmann::json::parse(k.out);
  CHECK(kj["margins"]["status"] == "OK");
  CHECK(kj["margins"]["delta_max"].get<double>() == doctest::Approx(M_PI / 10).epsilon(1e-9));

  const auto half = run({"klingenberg", "--model", "family", "--n", "10", "--eps", "0.5",
                         "--delta", "0.02", "--loop-length", "3"});
  CHECK(nlohmann::json::parse(half.out)["margins"]["status"] == "INFEASIBLE");

  const auto g = run({"gap", "--model", "family", "--n", "10", "--eps", "0.8", "--delta", "0.02"});
  CHECK(g.code == kExitPass);
  const auto gj = nlohmann::json::parse(g.out);
  CHECK(gj["margins"]["farthest"]["distance"].get<double>() ==
        doctest::Approx(3.866990817).epsilon(1e-9));
  CHECK(gj["margins"]["berger_ok"] == true);
}

TEST_CASE("output path and directory") {
  const fs::path dir = scratch_dir() / "reports";
  fs::remove_all(dir);
  const auto r = run({"curvature", "--model", "sphere", "--n", "3", "--grid", "100", "--dir",
                      dir.c_str(), "--out", "c.csv"});
  CHECK(r.code == kExitPass);
  CHECK(r.out.empty());
  CHECK(fs::exists(dir / "c.csv"));

  const auto sweep = run({"family-limit", "--n", "10", "--eps", "0.8", "--deltas", "0.04,0.02",
                          "--dir", dir.c_str()});
  CHECK(sweep.code == kExitPass);
  int written = 0;
  for (const auto& e : fs::directory_iterator(dir)) written += e.path().extension() == ".json";
  CHECK(written == 4);
}
