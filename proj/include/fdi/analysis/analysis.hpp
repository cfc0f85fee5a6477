#pragma once

#include <string>
#include <vector>

#include "fdi/dataset/dataset.hpp"
#include "fdi/grid/network.hpp"

namespace fdi::analysis {

struct Tolerances {
  double bus_p_mw = 1e-4;
  double bus_q_mvar = 1e-4;
  double global_mw = 1e-3;  // also applied to the reactive balance, in Mvar
};

/// Kirchhoff sums of the metered flow ends at one no-injection bus.
struct BusBalance {
  int bus = 0;
  double sum_p = 0.0;  // |sum P|, MW
  double sum_q = 0.0;  // |sum Q|, Mvar
  int metered_ends = 0;
};

struct RecordAudit {
  std::vector<BusBalance> buses;
  /// Metered injections minus branch losses (generation - load - losses).
  double global_p = 0.0;
  double global_q = 0.0;
  double residual_j = 0.0;
  bool electrical_ok = false;
};

struct AnalysisReport {
  RecordAudit normal;
  RecordAudit attack;
  double threshold = 0.0;
  int k_dof = 0;
  bool normal_below_threshold = false;
  bool attack_below_threshold = false;
  bool stealthy = false;  // every electrical check and both J below threshold
  std::vector<std::string> failures;
};

/// Electrical audit of one record from its measured values. Only metered
/// ends count towards a bus sum; unmetered buses without injection
/// contribute zero to the global balance. J uses unit weights.
RecordAudit audit_record(const grid::NetworkModel& network, const dataset::DatasetRecord& record,
                         const Tolerances& tol = {});

/// Audits a normal/attack pair taken at the same time stamp. Throws
/// PairingError when time stamps or meter lists differ. Records are not
/// modified.
AnalysisReport analyze_pair(const grid::NetworkModel& network, const dataset::DatasetRecord& normal,
                            const dataset::DatasetRecord& attack, double significance, const Tolerances& tol = {});

std::string to_json(const AnalysisReport& report);

}  // namespace fdi::analysis
