#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fdi/dataset/dataset.hpp"
#include "fdi/dataset/demand.hpp"
#include "fdi/error.hpp"
#include "fdi/powerflow/powerflow.hpp"

using namespace fdi;
namespace fs = std::filesystem;

namespace {

const fs::path kData = FDI_DATA_DIR;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fdi_test_" + name);
  fs::remove_all(dir);
  return dir;
}

dataset::DemandProfile head(const dataset::DemandProfile& p, std::size_t n) {
  dataset::DemandProfile out{{p.points.begin(), p.points.begin() + static_cast<std::ptrdiff_t>(n)}, p.source};
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_rows(const dataset::DatasetRecord& a, const dataset::DatasetRecord& b) {
  if (a.record_id != b.record_id || a.time != b.time || a.label != b.label || a.rows.size() != b.rows.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& x = a.rows[i];
    const auto& y = b.rows[i];
    if (x.measurement_id != y.measurement_id || x.kind != y.kind || x.from_bus != y.from_bus ||
        x.to_bus != y.to_bus || x.measured != y.measured || x.estimated != y.estimated ||
        x.deviation_pct != y.deviation_pct || x.bdd_flag != y.bdd_flag || x.provenance != y.provenance) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("bundled demand profile ingests") {
    const auto p = dataset::ingest_demand_csv(kData / "demand_3day_30min.csv");
    REQUIRE(p.size() == 144);
    CHECK(dataset::format_timestamp(p.points.front().time) == "2018-01-01T00:00:00");
    CHECK(p.points[1].time - p.points[0].time == 1800);
    for (const auto& pt : p.points) {
      CHECK(pt.demand_mw > 0.0);
    }
    const auto q = dataset::ingest_demand_csv(kData / "demand_3day_15min.csv");
    CHECK(q.size() == 288);
    CHECK(q.points.back().time - q.points.front().time == 287 * 900);
  }

  TEST_CASE("ingestion errors name the data row") {
    auto expect_row = [](const std::string& text, const std::string& row) {
      std::istringstream in(text);
      try {
        dataset::ingest_demand_csv(in);
        FAIL("expected an ingestion error");
      } catch (const IngestionError& e) {
        CHECK(std::string(e.what()).find(row) != std::string::npos);
      }
    };
    expect_row("timestamp,demand_mw\n2018-01-01 00:00,200\n2018-01-01 00:30,abc\n", "row 2");
    expect_row("timestamp,demand_mw\n2018-01-01 00:00,200\n2018-01-01 00:30,-5\n", "row 2");
    expect_row("timestamp,demand_mw\n2018-01-01 00:30,200\n2018-01-01 00:30,210\n", "row 2");
    expect_row("timestamp,demand_mw\n2018-13-01 00:00,200\n", "row 1");
    expect_row("timestamp,demand_mw\nyesterday,200\n", "row 1");
    std::istringstream wrong_header("time,load\n2018-01-01 00:00,200\n");
    CHECK_THROWS_AS(dataset::ingest_demand_csv(wrong_header), ParseError);
  }

  TEST_CASE("timestamps round-trip") {
    const auto t = dataset::parse_timestamp("2018-01-02 13:45");
    CHECK(dataset::format_timestamp(t) == "2018-01-02T13:45:00");
    CHECK(dataset::parse_timestamp("2018-01-02T13:45:00") == t);
    CHECK(t - dataset::parse_timestamp("2018-01-01 00:00") == 86400 + 13 * 3600 + 45 * 60);
    CHECK_THROWS_AS(dataset::parse_timestamp("2018/01/02"), InvalidArgument);
  }

  TEST_CASE("demand CSV round-trips") {
    const auto p = dataset::synthetic_profile(50, 30, dataset::parse_timestamp("2018-01-01 00:00"), 200, 330, 4);
    std::stringstream buf;
    dataset::write_demand_csv(p, buf);
    const auto back = dataset::ingest_demand_csv(buf);
    REQUIRE(back.size() == 50);
    for (std::size_t i = 0; i < 50; ++i) {
      CHECK(back.points[i].time == p.points[i].time);
      // Demand is written with three decimals, as in the bundled profiles.
      CHECK(std::abs(back.points[i].demand_mw - p.points[i].demand_mw) <= 5e-4);
    }
  }

  TEST_CASE("synthetic profile stays in range and is seeded") {
    const auto a = dataset::synthetic_profile(500, 10, 0, 200, 330, 1);
    const auto b = dataset::synthetic_profile(500, 10, 0, 200, 330, 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.points[i].demand_mw == b.points[i].demand_mw);
      CHECK(a.points[i].demand_mw >= 200.0);
      CHECK(a.points[i].demand_mw <= 330.0);
    }
  }

  TEST_CASE("load scaling keeps proportions and power factor") {
    const auto net = grid::wscc9();
    CHECK(dataset::total_load_mw(net) == doctest::Approx(315.0));
    const auto same = dataset::scale_loads(net, 315.0);
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
      CHECK(same.buses()[i].load_p == doctest::Approx(net.buses()[i].load_p).epsilon(1e-14));
      CHECK(same.buses()[i].gen_p == doctest::Approx(net.buses()[i].gen_p).epsilon(1e-14));
    }
    const auto half = dataset::scale_loads(net, 157.5);
    CHECK(half.bus(5).load_p == doctest::Approx(62.5));
    CHECK(half.bus(6).load_p == doctest::Approx(45.0));
    CHECK(half.bus(8).load_p == doctest::Approx(50.0));
    CHECK(dataset::total_load_mw(half) == doctest::Approx(157.5));
    for (int id : {5, 6, 8}) {
      CHECK(half.bus(id).load_q / half.bus(id).load_p ==
            doctest::Approx(net.bus(id).load_q / net.bus(id).load_p).epsilon(1e-12));
    }
    CHECK(half.bus(2).gen_p == doctest::Approx(81.5));
    CHECK_THROWS_AS(dataset::scale_loads(net, 0.0), InvalidArgument);
    CHECK_THROWS_AS(dataset::scale_loads(net, -3.0), InvalidArgument);
  }

  TEST_CASE("deviation percent") {
    CHECK(dataset::deviation_percent(110.0, 100.0) == doctest::Approx(10.0));
    CHECK(dataset::deviation_percent(0.5, 0.0) == doctest::Approx(50.0));
    CHECK(dataset::deviation_percent(-90.0, -100.0) == doctest::Approx(10.0));
  }

  TEST_CASE("attack deltas alternate sign and come from the configured set") {
    dataset::DatasetConfig cfg;
    cfg.attacks_per_point = 4;
    for (std::size_t p = 0; p < 50; ++p) {
      const auto d = dataset::attack_deltas(cfg, p);
      REQUIRE(d.size() == 4);
      CHECK(d == dataset::attack_deltas(cfg, p));
      for (std::size_t k = 0; k < d.size(); ++k) {
        CHECK((k % 2 == 0 ? d[k] > 0.0 : d[k] < 0.0));
        CHECK(std::find(cfg.deltas_deg.begin(), cfg.deltas_deg.end(), std::abs(d[k])) != cfg.deltas_deg.end());
      }
    }
  }

  TEST_CASE("config digest tracks value-shaping settings only") {
    dataset::DatasetConfig a;
    dataset::DatasetConfig b;
    b.threads = 7;
    b.log = [](const std::string&) {};
    CHECK(dataset::config_digest(a, "wscc9") == dataset::config_digest(b, "wscc9"));
    b.seed = 1;
    CHECK(dataset::config_digest(a, "wscc9") != dataset::config_digest(b, "wscc9"));
    CHECK(dataset::config_digest(a, "wscc9") != dataset::config_digest(a, "other"));
    CHECK(dataset::config_digest(a, "wscc9").size() == 64);
  }

  TEST_CASE("sha256 known answers") {
    CHECK(dataset::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(dataset::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("normal and attack records") {
    const auto net = grid::wscc9();
    const auto profile = head(dataset::ingest_demand_csv(kData / "demand_3day_30min.csv"), 6);
    dataset::DatasetConfig cfg;
    const auto normal = dataset::generate_normal_records(profile, net, cfg);
    const auto attack = dataset::generate_attack_records(profile, net, cfg);
    REQUIRE(normal.size() == 6);
    REQUIRE(attack.size() == 12);
    for (std::size_t i = 0; i < normal.size(); ++i) {
      const auto& r = normal[i];
      CHECK(r.record_id == static_cast<long>(i) + 1);
      CHECK(r.label == dataset::Label::Normal);
      CHECK(r.time == profile.points[i].time);
      CHECK(r.rows.size() == 48);
      CHECK(r.manipulated_rows() == 0);
      CHECK(r.flagged_rows() == 0);
      for (const auto& row : r.rows) {
        CHECK(row.deviation_pct == dataset::deviation_percent(row.measured, row.estimated));
      }
    }
    for (std::size_t i = 0; i < attack.size(); ++i) {
      const auto& r = attack[i];
      CHECK(r.record_id == static_cast<long>(i) + 1);
      CHECK(r.label == dataset::Label::Attack);
      CHECK(r.time == profile.points[i / 2].time);
      CHECK(r.manipulated_rows() == 34);
      CHECK(r.flagged_rows() == 0);
      const auto set = r.measurements();
      CHECK(set.size() == 48);
    }
  }

  TEST_CASE("an empty profile yields no records") {
    const auto net = grid::wscc9();
    std::size_t count = 0;
    const auto stats = dataset::generate_dataset({}, net, {}, [&](dataset::DatasetRecord&&) { ++count; });
    CHECK(count == 0);
    CHECK(stats.points == 0);
    CHECK(stats.normal == 0);
    CHECK(stats.attack == 0);
  }

  TEST_CASE("generation is independent of the thread count") {
    const auto net = grid::wscc9();
    const auto profile = head(dataset::ingest_demand_csv(kData / "demand_3day_30min.csv"), 70);
    dataset::DatasetConfig cfg;
    cfg.noise.kind = powerflow::NoiseModel::Kind::Gaussian;
    std::vector<dataset::DatasetRecord> one;
    std::vector<dataset::DatasetRecord> three;
    cfg.threads = 1;
    dataset::generate_dataset(profile, net, cfg, [&](dataset::DatasetRecord&& r) { one.push_back(std::move(r)); });
    cfg.threads = 3;
    dataset::generate_dataset(profile, net, cfg, [&](dataset::DatasetRecord&& r) { three.push_back(std::move(r)); });
    REQUIRE(one.size() == 210);
    REQUIRE(three.size() == one.size());
    for (std::size_t i = 0; i < one.size(); ++i) CHECK(same_rows(one[i], three[i]));
    // Per point: the normal record, then its attacks.
    CHECK(one[0].label == dataset::Label::Normal);
    CHECK(one[1].label == dataset::Label::Attack);
    CHECK(one[2].label == dataset::Label::Attack);
    CHECK(one[3].label == dataset::Label::Normal);
  }

  TEST_CASE("skipped points are logged and counted") {
    const auto net = grid::wscc9();
    auto profile = head(dataset::ingest_demand_csv(kData / "demand_3day_30min.csv"), 3);
    profile.points[1].demand_mw = 50'000.0;
    dataset::DatasetConfig cfg;
    std::vector<std::string> notes;
    cfg.log = [&](const std::string& s) { notes.push_back(s); };
    std::vector<dataset::DatasetRecord> records;
    const auto stats =
        dataset::generate_dataset(profile, net, cfg, [&](dataset::DatasetRecord&& r) { records.push_back(std::move(r)); });
    CHECK(stats.points == 3);
    CHECK(stats.normal == 2);
    CHECK(stats.attack == 4);
    CHECK(stats.skipped_normal == 1);
    CHECK(stats.skipped_attack == 2);
    CHECK_FALSE(notes.empty());
    CHECK(records.size() == 6);
    CHECK(records[3].record_id == 2);
    CHECK(records[3].time == profile.points[2].time);
  }

  TEST_CASE("partitions, manifest and read-back") {
    const auto net = grid::wscc9();
    const auto profile = head(dataset::ingest_demand_csv(kData / "demand_3day_30min.csv"), 5);
    dataset::DatasetConfig cfg;
    cfg.noise.kind = powerflow::NoiseModel::Kind::Gaussian;
    std::vector<dataset::DatasetRecord> records;
    const auto stats =
        dataset::generate_dataset(profile, net, cfg, [&](dataset::DatasetRecord&& r) { records.push_back(std::move(r)); });
    const auto dir = scratch("partitions");
    const auto manifest = dataset::write_dataset(records, dir, 4, cfg.seed, dataset::config_digest(cfg, net.name()), stats);
    CHECK(manifest.normal_records == 5);
    CHECK(manifest.attack_records == 10);
    CHECK(manifest.total_records == 15);
    CHECK(manifest.measurements_per_record == 48);
    CHECK(manifest.attributes_per_row == 9);
    auto files = manifest.files;
    std::sort(files.begin(), files.end());
    CHECK(files == std::vector<std::string>{"attack_0001.csv", "attack_0002.csv", "attack_0003.csv", "normal_0001.csv",
                                            "normal_0002.csv"});
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "SCHEMA.md"));
    const auto json = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(json.at("content_digest").get<std::string>() == manifest.content_digest);
    CHECK(json.at("seed").get<std::uint64_t>() == 2018);

    const auto first = slurp(dir / "normal_0001.csv");
    CHECK(first.rfind(std::string(dataset::kRecordHeader) + "\n", 0) == 0);

    const auto normal = dataset::read_dataset_dir(dir, dataset::Label::Normal);
    const auto attack = dataset::read_dataset_dir(dir, dataset::Label::Attack);
    REQUIRE(normal.size() == 5);
    REQUIRE(attack.size() == 10);
    std::size_t n = 0, a = 0;
    for (const auto& r : records) {
      CHECK(same_rows(r, r.label == dataset::Label::Normal ? normal[n++] : attack[a++]));
    }

    // Writing the same records again reproduces the bytes.
    const auto again = dataset::write_dataset(records, scratch("partitions_again"), 4, cfg.seed,
                                              dataset::config_digest(cfg, net.name()), stats);
    CHECK(again.content_digest == manifest.content_digest);
    fs::remove_all(dir);
    fs::remove_all(fs::temp_directory_path() / "fdi_test_partitions_again");
  }

  TEST_CASE("partition boundaries at the default size") {
    dataset::DatasetRecord r;
    r.label = dataset::Label::Normal;
    r.rows.resize(2);
    r.rows[1].measurement_id = 2;
    for (std::size_t n : {432u, 433u}) {
      std::vector<dataset::DatasetRecord> records;
      for (std::size_t i = 0; i < n; ++i) {
        r.record_id = static_cast<long>(i) + 1;
        r.time = static_cast<std::int64_t>(i) * 60;
        records.push_back(r);
      }
      const auto dir = scratch("boundary");
      const auto m = dataset::write_dataset(records, dir, 432);
      CHECK(m.files.size() == (n == 432 ? 1u : 2u));
      CHECK(dataset::read_dataset_dir(dir, dataset::Label::Normal).size() == n);
      fs::remove_all(dir);
    }
  }

  TEST_CASE("malformed dataset files are rejected") {
    const auto dir = scratch("malformed");
    fs::create_directories(dir);
    {
      std::ofstream out(dir / "normal_0001.csv");
      out << dataset::kRecordHeader << "\n1,2018-01-01T00:00:00,normal,1,P_FLOW,1,4,x,1,0,0,genuine\n";
    }
    CHECK_THROWS_AS(dataset::read_dataset_file(dir / "normal_0001.csv"), ParseError);
    fs::remove_all(dir);
  }
}
