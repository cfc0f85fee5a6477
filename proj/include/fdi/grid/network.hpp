#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace fdi::grid {

enum class BusKind { Slack, PV, PQ };

/// Net-injection sign used by the extended admittance matrix: -1 for a bus
/// that exports power, +1 for a bus that consumes it, 0 for a pure junction.
enum class InjectionClass : int { Generation = -1, None = 0, Load = 1 };

struct Bus {
  int id = 0;
  BusKind kind = BusKind::PQ;
  double voltage_setpoint = 1.0;  // p.u., meaningful for Slack/PV
  double load_p = 0.0;            // MW
  double load_q = 0.0;            // Mvar
  double gen_p = 0.0;             // MW (scheduled; unused for Slack)
  double gen_q = 0.0;             // Mvar

  /// Derived from the load/generation fields. Slack and PV buses always host
  /// a generator, so they are never classified as a pure junction.
  InjectionClass injection_class() const;
};

enum class BranchKind { Line, Transformer };

struct Branch {
  int from_bus = 0;
  int to_bus = 0;
  double r = 0.0;        // p.u.
  double x = 0.0;        // p.u.
  double b_shunt = 0.0;  // total line charging, p.u.
  double tap = 1.0;      // off-nominal ratio on the from side
  BranchKind kind = BranchKind::Line;
};

/// Immutable per-unit transmission network. Buses are kept sorted by id and
/// every matrix built from the model uses that order.
class NetworkModel {
 public:
  /// Validates every structural invariant; throws InvariantError or
  /// TopologyError.
  static NetworkModel create(std::vector<Bus> buses, std::vector<Branch> branches,
                             double base_mva = 100.0, std::string name = {});

  const std::vector<Bus>& buses() const noexcept { return buses_; }
  const std::vector<Branch>& branches() const noexcept { return branches_; }
  double base_mva() const noexcept { return base_mva_; }
  const std::string& name() const noexcept { return name_; }

  std::size_t bus_count() const noexcept { return buses_.size(); }
  std::size_t branch_count() const noexcept { return branches_.size(); }

  /// Position of a bus id in the sorted bus list.
  std::size_t index_of(int bus_id) const;
  std::optional<std::size_t> find_index(int bus_id) const;
  const Bus& bus(int bus_id) const { return buses_[index_of(bus_id)]; }

  std::size_t slack_index() const noexcept { return slack_index_; }

  /// Branch indices incident to the bus at `bus_index`.
  const std::vector<std::size_t>& incident_branches(std::size_t bus_index) const {
    return incident_[bus_index];
  }

  /// Branch index joining two bus ids, if any.
  std::optional<std::size_t> branch_between(int a, int b) const;

  /// Copy with the load of every bus replaced; used by demand scaling.
  NetworkModel with_loads(const std::vector<double>& load_p,
                          const std::vector<double>& load_q) const;

  /// Copy with every PV-bus dispatch multiplied by `factor`.
  NetworkModel with_dispatch_scaled(double factor) const;

  bool operator==(const NetworkModel& other) const;

 private:
  NetworkModel() = default;
  void index();

  std::vector<Bus> buses_;
  std::vector<Branch> branches_;
  double base_mva_ = 100.0;
  std::string name_;
  std::size_t slack_index_ = 0;
  std::vector<std::vector<std::size_t>> incident_;
};

std::string to_string(BusKind kind);
std::string to_string(BranchKind kind);
BusKind parse_bus_kind(const std::string& text);
BranchKind parse_branch_kind(const std::string& text);

/// Anderson-Fouad WSCC 9-bus system in its original bus numbering.
NetworkModel wscc9();

}  // namespace fdi::grid
