#include "fdi/powerflow/measurements.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "fdi/csv.hpp"
#include "fdi/error.hpp"

namespace fdi::powerflow {

std::string to_string(MeasurementKind kind) {
  switch (kind) {
    case MeasurementKind::PFlow: return "P_FLOW";
    case MeasurementKind::QFlow: return "Q_FLOW";
    case MeasurementKind::PInj: return "P_INJ";
    case MeasurementKind::QInj: return "Q_INJ";
  }
  return "P_FLOW";
}

std::string to_string(Provenance provenance) {
  return provenance == Provenance::Genuine ? "genuine" : "manipulated";
}

MeasurementKind parse_measurement_kind(const std::string& text) {
  if (text == "P_FLOW") return MeasurementKind::PFlow;
  if (text == "Q_FLOW") return MeasurementKind::QFlow;
  if (text == "P_INJ") return MeasurementKind::PInj;
  if (text == "Q_INJ") return MeasurementKind::QInj;
  throw InvariantError("unknown measurement kind '" + text + "'");
}

Provenance parse_provenance(const std::string& text) {
  if (text == "genuine") return Provenance::Genuine;
  if (text == "manipulated") return Provenance::Manipulated;
  throw InvariantError("unknown provenance '" + text + "'");
}

const Measurement* MeasurementSet::find(int id) const {
  auto it = std::find_if(entries.begin(), entries.end(), [id](const Measurement& m) { return m.id == id; });
  return it == entries.end() ? nullptr : &*it;
}

MeasurementSet MeasurementSet::without(const std::vector<int>& ids) const {
  MeasurementSet out;
  for (const auto& m : entries) {
    if (std::find(ids.begin(), ids.end(), m.id) == ids.end()) out.entries.push_back(m);
  }
  return out;
}

MeasurementPlan default_plan(const grid::NetworkModel& network, double sigma) {
  MeasurementPlan plan;
  for (const auto flow_kind : {MeasurementKind::PFlow, MeasurementKind::QFlow}) {
    for (const auto& br : network.branches()) {
      plan.entries.push_back({flow_kind, br.from_bus, br.to_bus, sigma});
      plan.entries.push_back({flow_kind, br.to_bus, br.from_bus, sigma});
    }
    const auto inj_kind = flow_kind == MeasurementKind::PFlow ? MeasurementKind::PInj : MeasurementKind::QInj;
    for (const auto& b : network.buses()) {
      if (b.injection_class() != grid::InjectionClass::None) plan.entries.push_back({inj_kind, b.id, b.id, sigma});
    }
  }
  // Reorder so every P meter precedes every Q meter.
  std::stable_partition(plan.entries.begin(), plan.entries.end(),
                        [](const PlanEntry& e) { return is_active(e.kind); });
  return plan;
}

MeasurementPlan plan_of(const MeasurementSet& set) {
  MeasurementPlan plan;
  for (const auto& m : set.entries) plan.entries.push_back({m.kind, m.from_bus, m.to_bus, m.sigma});
  return plan;
}

MeasurementModel::MeasurementModel(const grid::NetworkModel& network, const MeasurementPlan& plan)
    : eval_(network), base_mva_(network.base_mva()) {
  functionals_.reserve(plan.entries.size());
  for (const auto& e : plan.entries) {
    if (!(e.sigma > 0.0)) throw PlanError(fmt::format("meter {}-{}: sigma must be positive", e.from_bus, e.to_bus));
    const auto q = is_active(e.kind) ? Quantity::P : Quantity::Q;
    const auto bus = network.find_index(e.from_bus);
    if (!bus) throw PlanError(fmt::format("meter references missing bus {}", e.from_bus));
    if (is_flow(e.kind)) {
      const auto k = network.branch_between(e.from_bus, e.to_bus);
      if (!k) throw PlanError(fmt::format("meter references missing branch {}-{}", e.from_bus, e.to_bus));
      const auto side = network.branches()[*k].from_bus == e.from_bus ? Side::From : Side::To;
      functionals_.push_back({q, {{BranchEnd{*k, side}, 1.0}}});
    } else {
      if (e.to_bus != e.from_bus) {
        throw PlanError(fmt::format("injection meter at bus {} names a second bus {}", e.from_bus, e.to_bus));
      }
      functionals_.push_back(eval_.injection(*bus, q));
    }
  }
}

Eigen::VectorXd MeasurementModel::evaluate(const OperatingState& state) const {
  Eigen::VectorXd h(static_cast<Eigen::Index>(functionals_.size()));
  for (std::size_t i = 0; i < functionals_.size(); ++i) h(static_cast<Eigen::Index>(i)) = evaluate(state, i);
  return h;
}

double MeasurementModel::evaluate(const OperatingState& state, std::size_t row) const {
  return eval_.evaluate(state, functionals_[row]) * base_mva_;
}

Eigen::MatrixXd MeasurementModel::jacobian(const OperatingState& state, const std::vector<StateVariable>& vars) const {
  const VariableIndex index(vars, eval_.bus_count());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(functionals_.size()),
                                            static_cast<Eigen::Index>(vars.size()));
  for (std::size_t i = 0; i < functionals_.size(); ++i) {
    eval_.gradient(state, functionals_[i], index, h.row(static_cast<Eigen::Index>(i)));
  }
  return h * base_mva_;
}

std::vector<StateVariable> estimation_variables(const grid::NetworkModel& network) {
  std::vector<StateVariable> vars;
  for (std::size_t i = 0; i < network.bus_count(); ++i) {
    if (i != network.slack_index()) vars.push_back({i, VarKind::Angle});
  }
  for (std::size_t i = 0; i < network.bus_count(); ++i) vars.push_back({i, VarKind::Magnitude});
  return vars;
}

MeasurementSet generate_measurements(const grid::NetworkModel& network, const OperatingState& state,
                                     const MeasurementPlan& plan, const NoiseModel& noise, std::uint64_t seed) {
  const MeasurementModel model(network, plan);
  const Eigen::VectorXd h = model.evaluate(state);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  MeasurementSet set;
  set.entries.reserve(plan.entries.size());
  for (std::size_t i = 0; i < plan.entries.size(); ++i) {
    const auto& e = plan.entries[i];
    double value = h(static_cast<Eigen::Index>(i));
    if (noise.kind == NoiseModel::Kind::Gaussian) value += e.sigma * unit(rng);
    set.entries.push_back({static_cast<int>(i) + 1, e.kind, e.from_bus, e.to_bus, value, e.sigma,
                           Provenance::Genuine});
  }
  return set;
}

void write_measurements_csv(const MeasurementSet& set, std::ostream& out) {
  fmt::print(out, "id,kind,from_bus,to_bus,value,sigma,provenance\n");
  for (const auto& m : set.entries) {
    fmt::print(out, "{},{},{},{},{:.17g},{:.17g},{}\n", m.id, to_string(m.kind), m.from_bus, m.to_bus, m.value,
               m.sigma, to_string(m.provenance));
  }
}

void write_measurements_csv(const MeasurementSet& set, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_measurements_csv(set, out);
}

MeasurementSet read_measurements_csv(std::istream& in, const std::string& source) {
  csv::Reader reader(in, source);
  reader.expect_header({"id", "kind", "from_bus", "to_bus", "value", "sigma", "provenance"});
  MeasurementSet set;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() != 7) throw ParseError(fmt::format("expected 7 fields, got {}", f.size()), source, reader.line());
    Measurement m;
    m.id = reader.to_int(f[0], "id");
    try {
      m.kind = parse_measurement_kind(f[1]);
      m.provenance = parse_provenance(f[6]);
    } catch (const InvariantError& e) {
      throw ParseError(e.what(), source, reader.line());
    }
    m.from_bus = reader.to_int(f[2], "from_bus");
    m.to_bus = reader.to_int(f[3], "to_bus");
    m.value = reader.to_double(f[4], "value");
    m.sigma = reader.to_double(f[5], "sigma");
    set.entries.push_back(m);
  }
  return set;
}

MeasurementSet read_measurements_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file", path.string(), 0);
  return read_measurements_csv(in, path.string());
}

}  // namespace fdi::powerflow
