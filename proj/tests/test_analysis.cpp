#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "fdi/analysis/analysis.hpp"
#include "fdi/dataset/dataset.hpp"
#include "fdi/dataset/demand.hpp"
#include "fdi/error.hpp"
#include "fdi/estimation/estimator.hpp"

using namespace fdi;

namespace {

struct Fixture {
  grid::NetworkModel net = grid::wscc9();
  std::vector<dataset::DatasetRecord> normal;
  std::vector<dataset::DatasetRecord> attack;

  Fixture() {
    auto profile = dataset::ingest_demand_csv(std::filesystem::path(FDI_DATA_DIR) / "demand_3day_30min.csv");
    profile.points.resize(4);
    dataset::DatasetConfig cfg;
    normal = dataset::generate_normal_records(profile, net, cfg);
    attack = dataset::generate_attack_records(profile, net, cfg);
  }
};

dataset::RecordRow& row_of(dataset::DatasetRecord& r, powerflow::MeasurementKind kind, int from, int to) {
  for (auto& row : r.rows) {
    if (row.kind == kind && row.from_bus == from && row.to_bus == to) return row;
  }
  throw std::runtime_error("row not found");
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("attack records are stealthy against their normal pair") {
    const Fixture f;
    for (std::size_t i = 0; i < f.attack.size(); ++i) {
      const auto& n = f.normal[i / 2];
      const auto rep = analysis::analyze_pair(f.net, n, f.attack[i], 0.005);
      CAPTURE(i);
      CHECK(rep.stealthy);
      CHECK(rep.failures.empty());
      CHECK(rep.k_dof == 31);
      CHECK(rep.threshold == doctest::Approx(55.0027).epsilon(1e-5));
      CHECK(rep.normal.electrical_ok);
      CHECK(rep.attack.electrical_ok);
      REQUIRE(rep.attack.buses.size() == 3);
      CHECK(rep.attack.buses[0].bus == 4);
      CHECK(rep.attack.buses[0].metered_ends == 3);
      CHECK(rep.attack.buses[2].bus == 9);
      for (const auto& b : rep.attack.buses) {
        CHECK(b.sum_p < 1e-4);
        CHECK(b.sum_q < 1e-4);
      }
      CHECK(std::abs(rep.attack.global_p) < 1e-3);
      CHECK(std::abs(rep.attack.global_q) < 1e-3);
    }
  }

  TEST_CASE("a record paired with itself matches exactly") {
    const Fixture f;
    const auto rep = analysis::analyze_pair(f.net, f.normal[0], f.normal[0], 0.005);
    CHECK(rep.stealthy);
    CHECK(rep.normal.residual_j == rep.attack.residual_j);
    CHECK(rep.normal.global_p == rep.attack.global_p);
  }

  TEST_CASE("residual J matches the unit-weight square sum") {
    const Fixture f;
    const auto& r = f.attack[1];
    std::vector<double> m, e, s;
    for (const auto& row : r.rows) {
      m.push_back(row.measured);
      e.push_back(row.estimated);
      s.push_back(1.0);
    }
    CHECK(analysis::audit_record(f.net, r).residual_j == estimation::residual_j(m, e, s));
  }

  TEST_CASE("a naive injection breaks the bus balance") {
    const Fixture f;
    auto tampered = f.attack[0];
    row_of(tampered, powerflow::MeasurementKind::PFlow, 4, 5).measured += 10.0;
    const auto rep = analysis::analyze_pair(f.net, f.normal[0], tampered, 0.005);
    CHECK_FALSE(rep.stealthy);
    CHECK_FALSE(rep.attack.electrical_ok);
    CHECK(rep.attack.buses[0].sum_p == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(rep.normal.electrical_ok);
    bool named = false;
    for (const auto& msg : rep.failures) named = named || msg.find("bus 4") != std::string::npos;
    CHECK(named);
  }

  TEST_CASE("an injection change without matching flows breaks the global balance") {
    const Fixture f;
    auto tampered = f.attack[0];
    row_of(tampered, powerflow::MeasurementKind::PInj, 5, 5).measured -= 5.0;
    const auto audit = analysis::audit_record(f.net, tampered);
    CHECK(audit.global_p == doctest::Approx(-5.0).epsilon(1e-6));
    CHECK_FALSE(audit.electrical_ok);
  }

  TEST_CASE("pairing errors") {
    const Fixture f;
    CHECK_THROWS_AS(analysis::analyze_pair(f.net, f.normal[0], f.attack[2], 0.005), PairingError);
    auto shorter = f.attack[0];
    shorter.rows.pop_back();
    CHECK_THROWS_AS(analysis::analyze_pair(f.net, f.normal[0], shorter, 0.005), PairingError);
    auto swapped = f.attack[0];
    std::swap(swapped.rows[0], swapped.rows[1]);
    CHECK_THROWS_AS(analysis::analyze_pair(f.net, f.normal[0], swapped, 0.005), PairingError);
  }

  TEST_CASE("records are not modified and the report serialises") {
    const Fixture f;
    const auto before = f.attack[0];
    const auto rep = analysis::analyze_pair(f.net, f.normal[0], f.attack[0], 0.005);
    for (std::size_t i = 0; i < before.rows.size(); ++i) {
      CHECK(before.rows[i].measured == f.attack[0].rows[i].measured);
      CHECK(before.rows[i].estimated == f.attack[0].rows[i].estimated);
    }
    const auto json = nlohmann::json::parse(analysis::to_json(rep));
    CHECK(json.at("stealthy").get<bool>());
    CHECK(json.at("k_dof").get<int>() == 31);
    CHECK(json.at("attack").at("no_injection_buses").size() == 3);
  }
}
