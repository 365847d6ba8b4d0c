#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "droplet/cli.hpp"
#include "droplet/expansion.hpp"
#include "droplet/geometry.hpp"
#include "droplet/version.hpp"

using namespace droplet;
using Json = nlohmann::json;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> lines;
  std::istringstream is(s);
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream is(line);
  std::string cell;
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

const char* kHeader =
    "a,c,tau,N,status,regime,energy,liouville,C1,C2,C3,C4,C5,log_z_predicted";

}  // namespace

TEST_CASE("phase command reports the regime with margins") {
  const auto r = run({"phase", "--a", "0", "--c", "1", "--tau", "0"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["inputs"]["command"] == "phase");
  CHECK(j["inputs"]["a"] == 0.0);
  CHECK(j["outputs"]["regime"] == "I");
  CHECK(j["outputs"]["margins"].size() > 0);
  CHECK(j["checks"].is_array());
  CHECK(j["version"] == std::string(kVersion));
}

TEST_CASE("phase command labels a disconnected droplet without failing") {
  const auto r = run({"phase", "--a", "0", "--c", "1", "--tau", "0.8"});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["outputs"]["regime"] == "III");
}

TEST_CASE("map command emits annular data in the annular phase") {
  const auto r = run({"map", "--a", "0.1", "--c", "1", "--tau", "0.2"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["outputs"]["regime"] == "I");
  CHECK(j["outputs"]["ellipse_scale"].get<double>() ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(j["outputs"]["disc_center"] == 0.1);
  CHECK(j["outputs"]["disc_radius"].get<double>() ==
        doctest::Approx(std::sqrt(0.96)).epsilon(1e-14));
}

TEST_CASE("map command solves and round-trips the rational map") {
  const auto r = run({"map", "--a", "4", "--c", "1", "--tau", "0.3"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["outputs"]["regime"] == "II");
  CHECK(j["outputs"]["q"].get<double>() ==
        doctest::Approx(0.23160443091118826).epsilon(1e-9));
  CHECK(j["outputs"]["lambda"].get<double>() ==
        doctest::Approx(0.050962128342328855).epsilon(1e-9));
  CHECK(j["outputs"]["R"].get<double>() ==
        doctest::Approx(0.9851309803931436).epsilon(1e-9));
  REQUIRE(j["checks"].size() == 1);
  CHECK(j["checks"][0]["name"] == "coupled_roundtrip_residual");
  CHECK(j["checks"][0]["pass"] == true);
}

TEST_CASE("phase-dependent commands fail with the domain status on splitting") {
  for (const std::string cmd : {"map", "energy", "expand", "liouville"}) {
    const auto r = run({cmd, "--a", "0", "--c", "1", "--tau", "0.8"});
    INFO("command ", cmd);
    CHECK(r.code == 2);
    CHECK(r.err.find("phase error") != std::string::npos);
  }
}

TEST_CASE("energy command value") {
  const auto r = run({"energy", "--a", "0", "--c", "1", "--tau", "0"});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["outputs"]["energy"].get<double>() ==
        doctest::Approx(2.25 - 2.0 * std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("expand command respects the truncation order") {
  const auto r = run({"expand", "--a", "0.1", "--c", "1", "--tau", "0.2",
                      "--k0", "5", "--N", "20"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["outputs"]["C2"] == 0.5);
  CHECK(j["outputs"]["C4"] == 0.5);
  CHECK(j["outputs"]["chi"] == 0);
  CHECK(j["outputs"]["tail"].size() == 5);
  CHECK(j["outputs"]["k0"] == 5);
  const double pred = j["outputs"]["log_z_predicted"].get<double>();
  CHECK(pred == doctest::Approx(log_z_predicted({0.1, 1.0, 0.2}, 20, 5))
                    .epsilon(1e-15));
}

TEST_CASE("oracle command reproduces the elliptic reference at zero charge") {
  const auto r = run({"oracle", "--a", "0", "--c", "0", "--tau", "0.4", "--N", "4"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["outputs"]["N"] == 4);
  CHECK(j["outputs"]["log_Z"].get<double>() ==
        doctest::Approx(log_z_reference(ReferenceKind::elliptic, 4, {0.0, 0.0, 0.4}))
            .epsilon(1e-12));
  CHECK(j["outputs"]["achieved_tolerance"].get<double>() <= 1e-9);
  CHECK(j["checks"][0]["pass"] == true);
  CHECK(j["outputs"]["log_h"].size() == 4);
  CHECK(j["outputs"]["A"].size() == 6);
}

TEST_CASE("oracle command rejects fractional charge exponents") {
  const auto r = run({"oracle", "--a", "0.1", "--c", "0.371", "--tau", "0", "--N", "4"});
  CHECK(r.code == 2);
  CHECK(r.err.find("domain error") != std::string::npos);
}

TEST_CASE("verification suites succeed on their reference points") {
  const auto scaling = run({"verify", "--suite", "scaling", "--a", "0.2", "--c", "0.4",
                            "--tau", "0.3", "--N", "5"});
  REQUIRE(scaling.code == 0);
  const Json js = Json::parse(scaling.out);
  for (const auto& c : js["checks"]) CHECK(c["pass"] == true);

  const auto routes = run({"verify", "--suite", "liouville-routes", "--a", "0.3",
                           "--c", "1", "--tau", "0.1"});
  REQUIRE(routes.code == 0);
  const Json j = Json::parse(routes.out);
  REQUIRE(j["checks"].size() == 3);
  for (const auto& c : j["checks"]) CHECK(c["pass"] == true);
}

TEST_CASE("verification failure is the dedicated exit status") {
  // Finite-N coefficients differ from their large-N form by far more than
  // quadrature error, so this suite reports honest failures.
  const auto r = run({"verify", "--suite", "predicted-coeffs", "--a", "0.2",
                      "--c", "0.5", "--tau", "0.15", "--N", "8"});
  CHECK(r.code == 1);
  const Json j = Json::parse(r.out);
  bool any_fail = false;
  for (const auto& c : j["checks"])
    if (c["pass"] == false) any_fail = true;
  CHECK(any_fail);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == 64);
  CHECK(run({"frobnicate"}).code == 64);
  CHECK(run({"energy", "--bogus", "1"}).code == 64);
  CHECK(run({"verify", "--a", "0.2"}).code == 64);  // missing --suite
  CHECK(run({"verify", "--suite", "unknown-suite"}).code == 64);
  CHECK(run({"energy", "--format", "xml"}).code == 64);
  CHECK(run({"sweep", "--grid-a", "0:1"}).code == 64);
  CHECK(run({"sweep", "--grid-N", "4,x"}).code == 64);
}

TEST_CASE("help output lists the commands") {
  const auto r = run({"--help"});
  CHECK(r.code == 0);
  for (const char* name : {"phase", "map", "liouville", "energy", "expand",
                           "oracle", "verify", "sweep"})
    CHECK(r.out.find(name) != std::string::npos);
}

TEST_CASE("thread cap environment variable is validated") {
  setenv("COULOMB_DROPLET_THREADS", "abc", 1);
  CHECK(run({"energy", "--a", "0", "--c", "1", "--tau", "0"}).code == 64);
  setenv("COULOMB_DROPLET_THREADS", "0", 1);
  CHECK(run({"energy", "--a", "0", "--c", "1", "--tau", "0"}).code == 64);
  setenv("COULOMB_DROPLET_THREADS", "2", 1);
  const auto r = run({"energy", "--a", "0", "--c", "1", "--tau", "0"});
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out)["inputs"]["threads"] == 2);
  unsetenv("COULOMB_DROPLET_THREADS");
}

TEST_CASE("sweep emits one row per grid point in axis-major order") {
  const auto r = run({"sweep", "--grid-a", "0:0.1:2", "--c", "0.5", "--tau", "0.1",
                      "--grid-N", "4,8"});
  REQUIRE(r.code == 0);
  const auto lines = split_lines(r.out);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == kHeader);
  const char* expect_a[4] = {"0", "0", "0.1", "0.1"};
  const char* expect_n[4] = {"4", "8", "4", "8"};
  for (int i = 0; i < 4; ++i) {
    const auto cells = split_cells(lines[i + 1]);
    REQUIRE(cells.size() == 14);
    CHECK(cells[0] == expect_a[i]);
    CHECK(cells[3] == expect_n[i]);
    CHECK(cells[4] == "ok");
    CHECK(cells[5] == "I");
    // Numeric cells parse back to finite values.
    for (int k = 6; k < 14; ++k) CHECK(std::isfinite(std::stod(cells[k])));
  }
  // Unix line endings only.
  CHECK(r.out.find('\r') == std::string::npos);
}

TEST_CASE("sweep rows carry typed error codes instead of numbers") {
  const auto split = run({"sweep", "--a", "0", "--c", "1", "--tau", "0.8", "--N", "4"});
  REQUIRE(split.code == 0);
  auto cells = split_cells(split_lines(split.out)[1]);
  REQUIRE(cells.size() == 14);
  CHECK(cells[4] == "phase_error");
  CHECK(cells[5] == "III");
  for (int k = 6; k < 14; ++k) CHECK(cells[k].empty());

  // Just inside the annular phase but within the guard band.
  const auto near = run({"sweep", "--a", "0.41421355", "--c", "1", "--tau", "0",
                         "--N", "4"});
  REQUIRE(near.code == 0);
  cells = split_cells(split_lines(near.out)[1]);
  REQUIRE(cells.size() == 14);
  CHECK(cells[4] == "near_critical");
  CHECK(cells[5] == "I");
  CHECK(!cells[6].empty());  // energy itself is well defined
  CHECK(cells[8].empty());   // expansion coefficients are refused
}

TEST_CASE("empty grid produces only the header") {
  const auto r = run({"sweep", "--grid-a", "0:1:0"});
  REQUIRE(r.code == 0);
  CHECK(r.out == std::string(kHeader) + "\n");
}

TEST_CASE("sweep output is deterministic") {
  const std::vector<std::string> args = {"sweep", "--grid-a", "0:2:5", "--grid-c",
                                         "0.5:1.5:2", "--tau", "0.2", "--N", "6"};
  const auto r1 = run(args);
  const auto r2 = run(args);
  REQUIRE(r1.code == 0);
  CHECK(r1.out == r2.out);
}

TEST_CASE("out flag writes the report to a file") {
  const std::string path = "/tmp/droplet_cli_test_out.csv";
  std::remove(path.c_str());
  const auto r = run({"sweep", "--a", "0.1", "--c", "1", "--tau", "0", "--N", "4",
                      "--out", path});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(path);
  REQUIRE(f.good());
  std::string header;
  std::getline(f, header);
  CHECK(header == kHeader);
  std::remove(path.c_str());

  const auto bad = run({"energy", "--a", "0", "--c", "1", "--tau", "0", "--out",
                        "/nonexistent-dir-xyz/report.json"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("domain error") != std::string::npos);
}

TEST_CASE("json reports are deterministic and well formed") {
  const std::vector<std::string> args = {"liouville", "--a", "0.3", "--c", "1",
                                         "--tau", "0.1"};
  const auto r1 = run(args);
  const auto r2 = run(args);
  REQUIRE(r1.code == 0);
  CHECK(r1.out == r2.out);
  const Json j = Json::parse(r1.out);
  // Top-level report shape.
  REQUIRE(j.contains("inputs"));
  REQUIRE(j.contains("outputs"));
  REQUIRE(j.contains("checks"));
  REQUIRE(j.contains("version"));
  CHECK(j["outputs"]["per_component"].size() == 2);
}
