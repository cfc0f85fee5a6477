#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdi/grid/network.hpp"
#include "fdi/powerflow/flows.hpp"
#include "fdi/powerflow/powerflow.hpp"

namespace fdi::powerflow {

enum class MeasurementKind { PFlow, QFlow, PInj, QInj };
enum class Provenance { Genuine, Manipulated };

std::string to_string(MeasurementKind kind);
std::string to_string(Provenance provenance);
MeasurementKind parse_measurement_kind(const std::string& text);
Provenance parse_provenance(const std::string& text);

inline bool is_flow(MeasurementKind k) { return k == MeasurementKind::PFlow || k == MeasurementKind::QFlow; }
inline bool is_active(MeasurementKind k) { return k == MeasurementKind::PFlow || k == MeasurementKind::PInj; }

/// One telemetered value. Flows are metered at `from_bus` on the branch to
/// `to_bus`; injections use from_bus == to_bus.
struct Measurement {
  int id = 0;
  MeasurementKind kind = MeasurementKind::PFlow;
  int from_bus = 0;
  int to_bus = 0;
  double value = 0.0;  // MW or Mvar
  double sigma = 1.0;  // same unit as value
  Provenance provenance = Provenance::Genuine;
};

struct MeasurementSet {
  std::vector<Measurement> entries;

  std::size_t size() const noexcept { return entries.size(); }
  const Measurement* find(int id) const;
  MeasurementSet without(const std::vector<int>& ids) const;
};

struct PlanEntry {
  MeasurementKind kind = MeasurementKind::PFlow;
  int from_bus = 0;
  int to_bus = 0;
  double sigma = 1.0;
};

struct MeasurementPlan {
  std::vector<PlanEntry> entries;
};

/// Flows at both ends of every branch plus injections at every bus with a
/// nonzero injection class; all P entries first, then all Q entries. For the
/// 9-bus case that is 48 meters.
MeasurementPlan default_plan(const grid::NetworkModel& network, double sigma = 1.0);

MeasurementPlan plan_of(const MeasurementSet& set);

struct NoiseModel {
  enum class Kind { None, Gaussian };
  Kind kind = Kind::None;
};

/// True values from the operating state, plus N(0, sigma^2) noise when
/// requested. Deterministic for a given seed. Throws PlanError for entries
/// that reference missing buses or branches.
MeasurementSet generate_measurements(const grid::NetworkModel& network, const OperatingState& state,
                                     const MeasurementPlan& plan, const NoiseModel& noise = {},
                                     std::uint64_t seed = 0);

/// Plan entries resolved to flow functionals, for repeated evaluation by the
/// estimator and the attack solver.
class MeasurementModel {
 public:
  MeasurementModel(const grid::NetworkModel& network, const MeasurementPlan& plan);

  std::size_t size() const noexcept { return functionals_.size(); }
  double base_mva() const noexcept { return base_mva_; }
  const FlowEvaluator& evaluator() const noexcept { return eval_; }

  /// h(x) in MW/Mvar.
  Eigen::VectorXd evaluate(const OperatingState& state) const;
  double evaluate(const OperatingState& state, std::size_t row) const;

  /// dh/dx in MW (Mvar) per rad or per p.u.
  Eigen::MatrixXd jacobian(const OperatingState& state, const std::vector<StateVariable>& vars) const;

 private:
  FlowEvaluator eval_;
  std::vector<FlowFunctional> functionals_;
  double base_mva_;
};

/// Variables estimated by WLS: every non-slack angle, then every magnitude.
std::vector<StateVariable> estimation_variables(const grid::NetworkModel& network);

// CSV columns: id,kind,from_bus,to_bus,value,sigma,provenance
void write_measurements_csv(const MeasurementSet& set, std::ostream& out);
void write_measurements_csv(const MeasurementSet& set, const std::filesystem::path& path);
MeasurementSet read_measurements_csv(std::istream& in, const std::string& source = "measurements");
MeasurementSet read_measurements_csv(const std::filesystem::path& path);

}  // namespace fdi::powerflow
