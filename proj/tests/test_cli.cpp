#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fdi/cli/cli.hpp"
#include "fdi/powerflow/measurements.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = fdi::cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fdi_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const std::string kData = FDI_DATA_DIR;

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("version and help") {
    const auto v = run({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find(fdi::cli::kVersion) != std::string::npos);
    const auto h = run({"--help"});
    CHECK(h.code == 0);
    for (const char* sub : {"powerflow", "estimate", "attack", "dataset", "analyze", "dc-baseline"}) {
      CHECK(h.out.find(sub) != std::string::npos);
    }
  }

  TEST_CASE("usage errors exit with 2") {
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
    const auto missing = run({"estimate"});
    CHECK(missing.code == 2);
    CHECK_FALSE(missing.err.empty());
    CHECK(run({"powerflow", "--tol", "abc"}).code == 2);
    CHECK(run({"attack", "--delta-deg", "1", "--delta-pu", "0.01"}).code == 2);
  }

  TEST_CASE("power flow report") {
    const auto r = run({"--json", "powerflow"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j.at("case") == "wscc9");
    const auto& bus5 = j.at("buses").at(4);
    CHECK(bus5.at("bus") == 5);
    CHECK(bus5.at("v_mag_pu").get<double>() == doctest::Approx(0.9956).epsilon(1e-4));
    CHECK(bus5.at("v_ang_deg").get<double>() == doctest::Approx(-3.989).epsilon(1e-3));
    const auto dc = run({"--json", "powerflow", "--dc"});
    CHECK(dc.code == 0);
    CHECK(json::parse(dc.out).at("method") == "dc");
    const auto text = run({"powerflow"});
    CHECK(text.code == 0);
    CHECK_FALSE(text.out.empty());
  }

  TEST_CASE("power flow, estimate and attack through files") {
    const auto dir = scratch("files");
    const auto state = (dir / "state.csv").string();
    const auto meas = (dir / "meas.csv").string();
    REQUIRE(run({"powerflow", "--state-out", state, "--measurements-out", meas, "--noise", "gaussian", "--seed", "3"})
                .code == 0);
    CHECK(fdi::powerflow::read_measurements_csv(fs::path(meas)).size() == 48);

    const auto est = run({"--json", "estimate", "--measurements", meas});
    REQUIRE(est.code == 0);
    const auto ej = json::parse(est.out);
    CHECK(ej.at("bdd").at("k_dof") == 31);
    CHECK(ej.at("bdd").at("threshold").get<double>() == doctest::Approx(55.0027).epsilon(1e-5));
    CHECK(ej.at("bdd").at("passed").get<bool>());
    CHECK(ej.at("observability").at("rank") == 17);

    const auto csv = (dir / "report.csv").string();
    CHECK(run({"estimate", "--measurements", meas, "--report", "csv", "--report-out", csv}).code == 0);
    CHECK(fs::file_size(csv) > 0);

    const auto out = dir / "attack";
    const auto atk = run({"--json", "attack", "--state", state, "--measurements", meas, "--delta-deg", "1.5", "--out",
                          out.string()});
    REQUIRE(atk.code == 0);
    const auto aj = json::parse(atk.out);
    CHECK(aj.at("manipulated_count") == 34);
    CHECK(fs::exists(out / "corrupted.csv"));
    CHECK(fs::exists(out / "attack_manifest.json"));
    const auto stealth = run({"--json", "estimate", "--measurements", (out / "corrupted.csv").string()});
    REQUIRE(stealth.code == 0);
    CHECK(json::parse(stealth.out).at("bdd").at("passed").get<bool>());
    fs::remove_all(dir);
  }

  TEST_CASE("attack report around bus 5") {
    const auto r = run({"--json", "attack", "--center-bus", "5", "--delta-deg", "0.5"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j.at("manipulated_ids").size() == 34);
    CHECK(j.at("area").at("buses") == json::array({1, 2, 4, 5, 6, 7, 8}));
    CHECK(j.at("changeable") == json::array({"theta2", "theta4", "theta5", "theta7", "V4", "V5", "V7"}));
    CHECK(j.at("solver").at("jacobian_rank") == 4);
  }

  TEST_CASE("domain errors exit with 1") {
    const auto r = run({"attack", "--center-bus", "9"});
    CHECK(r.code == 1);
    CHECK(r.err.find("error:") != std::string::npos);
    const auto dir = scratch("bad");
    {
      std::ofstream bad(dir / "bad.csv");
      bad << "id,kind\n1,P_FLOW\n";
    }
    CHECK(run({"estimate", "--measurements", (dir / "bad.csv").string()}).code == 1);
    CHECK(run({"estimate", "--measurements", (dir / "absent.csv").string()}).code == 1);
    CHECK(run({"powerflow", "--case", (dir / "nope.json").string()}).code == 1);
    fs::remove_all(dir);
  }

  TEST_CASE("dataset generation and analysis") {
    const auto dir = scratch("dataset");
    const auto out = (dir / "ds").string();
    const auto gen = run({"--json", "dataset", "--demand", kData + "/demand_3day_30min.csv", "--out", out,
                          "--threads", "2"});
    REQUIRE(gen.code == 0);
    const auto gj = json::parse(gen.out);
    CHECK(gj.at("points") == 144);
    CHECK(gj.at("normal_records") == 144);
    CHECK(gj.at("attack_records") == 288);
    const auto manifest = json::parse(std::ifstream(fs::path(out) / "manifest.json"));
    CHECK(manifest.at("counts").at("total") == 432);
    CHECK(manifest.at("files").size() == 2);

    const auto all = run({"--json", "analyze", "--dataset", out});
    REQUIRE(all.code == 0);
    const auto aj = json::parse(all.out);
    CHECK(aj.at("pairs") == 288);
    CHECK(aj.at("stealthy") == 288);

    const auto one = run({"--json", "analyze", "--dataset", out, "--normal-id", "3", "--attack-id", "6"});
    CHECK(one.code == 0);
    CHECK(json::parse(one.out).at("stealthy").get<bool>());
    CHECK(run({"analyze", "--dataset", out, "--normal-id", "3", "--attack-id", "9"}).code == 1);
    fs::remove_all(dir);
  }

  TEST_CASE("linear baseline experiment partitions the trials") {
    const auto r = run({"--json", "dc-baseline", "--trials", "10"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j.at("trials") == 10);
    CHECK(j.at("diverged").get<int>() + j.at("flagged").get<int>() + j.at("bypassed").get<int>() == 10);
  }
}
