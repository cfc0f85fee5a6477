#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fdi/csv.hpp"
#include "fdi/error.hpp"
#include "fdi/grid/admittance.hpp"
#include "fdi/grid/case_io.hpp"
#include "fdi/grid/network.hpp"
#include "oracles/random_network.hpp"
#include "oracles/ybus_oracle.hpp"

using namespace fdi;
using grid::Branch;
using grid::Bus;
using grid::BusKind;
using grid::NetworkModel;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fdi_test_grid_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

double max_diff(const Eigen::MatrixXcd& y, const oracle::CMatrix& ref) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    for (Eigen::Index j = 0; j < y.cols(); ++j)
      worst = std::max(worst, std::abs(y(i, j) - ref[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
  return worst;
}

std::vector<Bus> three_buses() {
  return {{1, BusKind::Slack, 1.0, 0, 0, 0, 0}, {2, BusKind::PQ, 1.0, 50, 10, 0, 0}, {3, BusKind::PQ, 1.0, 20, 5, 0, 0}};
}

std::vector<Branch> three_branches() {
  Branch a;
  a.from_bus = 1;
  a.to_bus = 2;
  a.r = 0.01;
  a.x = 0.1;
  Branch b = a;
  b.from_bus = 2;
  b.to_bus = 3;
  return {a, b};
}

}  // namespace

TEST_SUITE("grid") {
  TEST_CASE("bundled 9-bus case has the expected shape") {
    const auto net = grid::wscc9();
    CHECK(net.bus_count() == 9);
    CHECK(net.branch_count() == 9);
    CHECK(net.base_mva() == 100.0);
    CHECK(net.buses()[net.slack_index()].id == 1);
    CHECK(net.bus(5).load_p == 125.0);
    CHECK(net.bus(6).load_q == 30.0);
    CHECK(net.bus(2).gen_p == 163.0);
    CHECK(net.branch_between(7, 5).has_value());
    CHECK_FALSE(net.branch_between(5, 6).has_value());
  }

  TEST_CASE("admittance matrix matches the terminal-current oracle") {
    const auto net = grid::wscc9();
    CHECK(max_diff(grid::build_admittance_matrix(net), oracle::ybus(net)) < 1e-12);
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      const auto rnd = oracle::random_network(seed, 6 + static_cast<int>(seed % 7));
      CAPTURE(seed);
      CHECK(max_diff(grid::build_admittance_matrix(rnd), oracle::ybus(rnd)) < 1e-10);
    }
  }

  TEST_CASE("textbook 9-bus admittance entries") {
    // Hand-computed from the branch data: y45 = 1/(0.01 + j0.085), etc.
    const auto y = grid::build_admittance_matrix(grid::wscc9());
    const auto idx = [](int id) { return static_cast<Eigen::Index>(id - 1); };
    CHECK(y(idx(4), idx(4)).real() == doctest::Approx(3.3074).epsilon(1e-4));
    CHECK(y(idx(4), idx(4)).imag() == doctest::Approx(-39.3089).epsilon(1e-4));
    CHECK(y(idx(4), idx(5)).real() == doctest::Approx(-1.3652).epsilon(1e-4));
    CHECK(y(idx(4), idx(5)).imag() == doctest::Approx(11.6041).epsilon(1e-4));
    CHECK(y(idx(1), idx(4)).imag() == doctest::Approx(17.3611).epsilon(1e-4));
    CHECK(std::abs(y(idx(1), idx(2))) == 0.0);
  }

  TEST_CASE("admittance matrix is symmetric and rows sum to the shunts") {
    const auto net = grid::wscc9();
    const auto y = grid::build_admittance_matrix(net);
    CHECK((y - y.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    // Row sums: half the charging of every incident line.
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
      double shunt = 0.0;
      for (const auto k : net.incident_branches(i)) shunt += net.branches()[k].b_shunt / 2.0;
      const grid::Complex sum = y.row(static_cast<Eigen::Index>(i)).sum();
      CHECK(std::abs(sum.real()) < 1e-12);
      CHECK(sum.imag() == doctest::Approx(shunt).epsilon(1e-12));
    }
  }

  TEST_CASE("off-nominal tap breaks symmetry of the diagonal only") {
    auto branches = three_branches();
    branches[0].tap = 0.95;
    const auto net = NetworkModel::create(three_buses(), branches);
    const auto y = grid::build_admittance_matrix(net);
    CHECK(max_diff(y, oracle::ybus(net)) < 1e-12);
    const auto series = 1.0 / grid::Complex(0.01, 0.1);
    CHECK(std::abs(y(0, 0) - series / (0.95 * 0.95)) < 1e-12);
    CHECK(std::abs(y(0, 1) + series / 0.95) < 1e-12);
    CHECK(std::abs(y(1, 0) - y(0, 1)) < 1e-12);
  }

  TEST_CASE("extended admittance matrix appends the injection class") {
    const auto net = grid::wscc9();
    const auto ext = grid::build_extended_ybus(net);
    CHECK(ext.rows() == 9);
    CHECK(ext.cols() == 10);
    const std::map<int, int> expected{{1, -1}, {2, -1}, {3, -1}, {4, 0}, {5, 1}, {6, 1}, {7, 0}, {8, 1}, {9, 0}};
    for (const auto& [id, cls] : expected) {
      const auto i = static_cast<Eigen::Index>(ext.index_of(id));
      CHECK(ext.at(i, 9) == grid::Complex(cls, 0));
      CHECK(ext.injection_column()[static_cast<std::size_t>(i)] == cls);
    }
    CHECK(ext.at(3, 4) == grid::build_admittance_matrix(net)(3, 4));
  }

  TEST_CASE("network validation") {
    SUBCASE("duplicate bus id") {
      auto buses = three_buses();
      buses[2].id = 2;
      CHECK_THROWS_AS(NetworkModel::create(buses, three_branches()), InvariantError);
    }
    SUBCASE("two slack buses") {
      auto buses = three_buses();
      buses[1].kind = BusKind::Slack;
      CHECK_THROWS_AS(NetworkModel::create(buses, three_branches()), InvariantError);
    }
    SUBCASE("no slack bus") {
      auto buses = three_buses();
      buses[0].kind = BusKind::PV;
      CHECK_THROWS_AS(NetworkModel::create(buses, three_branches()), InvariantError);
    }
    SUBCASE("zero reactance") {
      auto branches = three_branches();
      branches[1].x = 0.0;
      CHECK_THROWS_AS(NetworkModel::create(three_buses(), branches), InvariantError);
    }
    SUBCASE("self loop") {
      auto branches = three_branches();
      branches[1].to_bus = 2;
      CHECK_THROWS_AS(NetworkModel::create(three_buses(), branches), InvariantError);
    }
    SUBCASE("unknown bus") {
      auto branches = three_branches();
      branches[1].to_bus = 7;
      CHECK_THROWS_AS(NetworkModel::create(three_buses(), branches), InvariantError);
    }
    SUBCASE("parallel branch") {
      auto branches = three_branches();
      branches.push_back(branches[0]);
      std::swap(branches.back().from_bus, branches.back().to_bus);
      CHECK_THROWS_AS(NetworkModel::create(three_buses(), branches), InvariantError);
    }
    SUBCASE("island") {
      auto branches = three_branches();
      branches.pop_back();
      CHECK_THROWS_AS(NetworkModel::create(three_buses(), branches), TopologyError);
    }
    SUBCASE("non-positive tap") {
      auto branches = three_branches();
      branches[0].tap = 0.0;
      CHECK_THROWS_AS(NetworkModel::create(three_buses(), branches), InvariantError);
    }
    SUBCASE("index_of an unknown id") { CHECK_THROWS_AS(grid::wscc9().index_of(42), InvariantError); }
  }

  TEST_CASE("injection classes") {
    const auto net = grid::wscc9();
    CHECK(net.bus(1).injection_class() == grid::InjectionClass::Generation);
    CHECK(net.bus(3).injection_class() == grid::InjectionClass::Generation);
    CHECK(net.bus(8).injection_class() == grid::InjectionClass::Load);
    CHECK(net.bus(9).injection_class() == grid::InjectionClass::None);
  }

  TEST_CASE("with_loads replaces loads and keeps topology") {
    const auto net = grid::wscc9();
    std::vector<double> p(9, 0.0), q(9, 0.0);
    p[4] = 10.0;
    const auto other = net.with_loads(p, q);
    CHECK(other.bus(5).load_p == 10.0);
    CHECK(other.bus(6).load_p == 0.0);
    CHECK(other.branches().size() == net.branches().size());
    CHECK_FALSE(other == net);
    CHECK_THROWS_AS(net.with_loads({1.0}, {1.0}), DimensionError);
  }

  TEST_CASE("case files round-trip") {
    const auto net = grid::wscc9();
    const auto dir = temp_dir("roundtrip");
    grid::save_network(net, dir / "case.json", grid::CaseFormat::Json);
    CHECK(grid::load_network(dir / "case.json", grid::CaseFormat::Json) == net);
    grid::save_network(net, dir / "wscc9", grid::CaseFormat::Csv);
    CHECK(grid::load_network(dir / "wscc9", grid::CaseFormat::Csv) == net);
    for (std::uint64_t seed : {3u, 9u}) {
      const auto rnd = oracle::random_network(seed);
      grid::save_network(rnd, dir / "rnd.json", grid::CaseFormat::Json);
      CHECK(grid::load_network(dir / "rnd.json", grid::CaseFormat::Json) == rnd);
    }
  }

  TEST_CASE("bundled case files equal the built-in case") {
    const auto net = grid::wscc9();
    CHECK(grid::load_case(FDI_DATA_DIR "/wscc9.json") == net);
    CHECK(grid::load_case(FDI_DATA_DIR "/wscc9") == net);
    CHECK(grid::load_case("wscc9") == net);
  }

  TEST_CASE("malformed case files raise parse errors") {
    const auto dir = temp_dir("bad");
    std::ofstream(dir / "broken.json") << "{\"buses\": [";
    CHECK_THROWS_AS(grid::load_network(dir / "broken.json", grid::CaseFormat::Json), ParseError);
    std::ofstream(dir / "missing.json") << R"({"buses": [{"id": 1}], "branches": []})";
    CHECK_THROWS_AS(grid::load_network(dir / "missing.json", grid::CaseFormat::Json), ParseError);
    CHECK_THROWS_AS(grid::load_network(dir / "absent.json", grid::CaseFormat::Json), ParseError);

    std::filesystem::create_directories(dir / "csvcase");
    std::ofstream(dir / "csvcase" / "buses.csv") << "id,kind,v_setpoint,load_p_mw,load_q_mvar,gen_p_mw,gen_q_mvar\n"
                                                    "1,slack,1.0,0,0,0,0\n2,pq,1.0,abc,0,0,0\n";
    std::ofstream(dir / "csvcase" / "branches.csv") << "from,to,r,x,b,tap,kind\n1,2,0.01,0.1,0,1,line\n";
    try {
      grid::load_network(dir / "csvcase", grid::CaseFormat::Csv);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }

  TEST_CASE("csv reader") {
    std::istringstream in("# comment\na, b ,c\n\n1,2.5,x\n");
    csv::Reader reader(in, "mem");
    reader.expect_header({"a", "b", "c"});
    std::vector<std::string> f;
    REQUIRE(reader.next(f));
    CHECK(f == std::vector<std::string>{"1", "2.5", "x"});
    CHECK(reader.line() == 4);
    CHECK(reader.to_int(f[0], "a") == 1);
    CHECK(reader.to_double(f[1], "b") == 2.5);
    CHECK_THROWS_AS(reader.to_double(f[2], "c"), ParseError);
    CHECK_FALSE(reader.next(f));

    std::istringstream wrong("x,y\n");
    csv::Reader r2(wrong, "mem");
    CHECK_THROWS_AS(r2.expect_header({"a", "b"}), ParseError);
  }
}
