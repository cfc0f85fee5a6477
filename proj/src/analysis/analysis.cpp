#include "fdi/analysis/analysis.hpp"

#include <cmath>
#include <map>
#include <utility>

#include <fmt/format.h>
#include <json.hpp>

#include "fdi/error.hpp"
#include "fdi/estimation/chi_square.hpp"
#include "fdi/estimation/estimator.hpp"

namespace fdi::analysis {

using powerflow::MeasurementKind;

RecordAudit audit_record(const grid::NetworkModel& network, const dataset::DatasetRecord& record,
                         const Tolerances& tol) {
  RecordAudit audit;
  std::map<int, BusBalance> buses;
  for (const auto& b : network.buses()) {
    if (b.injection_class() == grid::InjectionClass::None) buses[b.id] = {b.id, 0.0, 0.0, 0};
  }

  // Per-branch end sums; the loss of a branch is known when both ends are metered.
  struct Ends {
    double p = 0.0, q = 0.0;
    int p_ends = 0, q_ends = 0;
  };
  std::map<std::pair<int, int>, Ends> branch_ends;
  double injected_p = 0.0;
  double injected_q = 0.0;

  std::vector<double> measured;
  std::vector<double> estimated;
  for (const auto& r : record.rows) {
    measured.push_back(r.measured);
    estimated.push_back(r.estimated);
    switch (r.kind) {
      case MeasurementKind::PInj: injected_p += r.measured; break;
      case MeasurementKind::QInj: injected_q += r.measured; break;
      case MeasurementKind::PFlow:
      case MeasurementKind::QFlow: {
        const bool active = r.kind == MeasurementKind::PFlow;
        auto key = std::minmax(r.from_bus, r.to_bus);
        auto& e = branch_ends[{key.first, key.second}];
        (active ? e.p : e.q) += r.measured;
        ++(active ? e.p_ends : e.q_ends);
        if (auto it = buses.find(r.from_bus); it != buses.end()) {
          (active ? it->second.sum_p : it->second.sum_q) += r.measured;
          if (active) ++it->second.metered_ends;
        }
        break;
      }
    }
  }

  double losses_p = 0.0;
  double losses_q = 0.0;
  for (const auto& [key, e] : branch_ends) {
    if (e.p_ends == 2) losses_p += e.p;
    if (e.q_ends == 2) losses_q += e.q;
  }
  audit.global_p = injected_p - losses_p;
  audit.global_q = injected_q - losses_q;

  audit.electrical_ok = std::abs(audit.global_p) < tol.global_mw && std::abs(audit.global_q) < tol.global_mw;
  for (auto& [id, b] : buses) {
    b.sum_p = std::abs(b.sum_p);
    b.sum_q = std::abs(b.sum_q);
    if (!(b.sum_p < tol.bus_p_mw) || !(b.sum_q < tol.bus_q_mvar)) audit.electrical_ok = false;
    audit.buses.push_back(b);
  }
  const std::vector<double> sigmas(measured.size(), 1.0);
  audit.residual_j = estimation::residual_j(measured, estimated, sigmas);
  return audit;
}

AnalysisReport analyze_pair(const grid::NetworkModel& network, const dataset::DatasetRecord& normal,
                            const dataset::DatasetRecord& attack, double significance, const Tolerances& tol) {
  if (normal.time != attack.time) {
    throw PairingError(fmt::format("records {} and {} carry different time stamps", normal.record_id,
                                   attack.record_id));
  }
  if (normal.rows.size() != attack.rows.size()) {
    throw PairingError(fmt::format("records hold {} and {} rows", normal.rows.size(), attack.rows.size()));
  }
  for (std::size_t i = 0; i < normal.rows.size(); ++i) {
    const auto& a = normal.rows[i];
    const auto& b = attack.rows[i];
    if (a.measurement_id != b.measurement_id || a.kind != b.kind || a.from_bus != b.from_bus || a.to_bus != b.to_bus) {
      throw PairingError(fmt::format("row {} describes different meters ({} vs {})", i + 1, a.measurement_id,
                                     b.measurement_id));
    }
  }

  AnalysisReport report;
  report.normal = audit_record(network, normal, tol);
  report.attack = audit_record(network, attack, tol);
  report.k_dof = static_cast<int>(normal.rows.size()) - static_cast<int>(2 * network.bus_count() - 1);
  report.threshold = estimation::chi_square_threshold(report.k_dof, significance);
  report.normal_below_threshold = report.normal.residual_j < report.threshold;
  report.attack_below_threshold = report.attack.residual_j < report.threshold;

  auto check = [&](bool ok, const std::string& what) {
    if (!ok) report.failures.push_back(what);
  };
  for (const auto* audit : {&report.normal, &report.attack}) {
    const char* which = audit == &report.normal ? "normal" : "attack";
    for (const auto& b : audit->buses) {
      check(b.sum_p < tol.bus_p_mw, fmt::format("{}: |sum P| at bus {} = {:.3e} MW", which, b.bus, b.sum_p));
      check(b.sum_q < tol.bus_q_mvar, fmt::format("{}: |sum Q| at bus {} = {:.3e} Mvar", which, b.bus, b.sum_q));
    }
    check(std::abs(audit->global_p) < tol.global_mw,
          fmt::format("{}: global P mismatch {:.3e} MW", which, audit->global_p));
    check(std::abs(audit->global_q) < tol.global_mw,
          fmt::format("{}: global Q mismatch {:.3e} Mvar", which, audit->global_q));
  }
  check(report.normal_below_threshold, fmt::format("normal: J = {:.4g} above {:.4g}", report.normal.residual_j,
                                                   report.threshold));
  check(report.attack_below_threshold, fmt::format("attack: J = {:.4g} above {:.4g}", report.attack.residual_j,
                                                   report.threshold));
  report.stealthy = report.failures.empty();
  return report;
}

namespace {

nlohmann::json audit_json(const RecordAudit& a) {
  nlohmann::json buses = nlohmann::json::array();
  for (const auto& b : a.buses) buses.push_back({{"bus", b.bus}, {"abs_sum_p_mw", b.sum_p}, {"abs_sum_q_mvar", b.sum_q}});
  return {{"no_injection_buses", buses},
          {"global_p_mismatch_mw", a.global_p},
          {"global_q_mismatch_mvar", a.global_q},
          {"residual_j", a.residual_j},
          {"electrical_ok", a.electrical_ok}};
}

}  // namespace

std::string to_json(const AnalysisReport& r) {
  const nlohmann::json j = {{"normal", audit_json(r.normal)},
                            {"attack", audit_json(r.attack)},
                            {"k_dof", r.k_dof},
                            {"threshold", r.threshold},
                            {"normal_below_threshold", r.normal_below_threshold},
                            {"attack_below_threshold", r.attack_below_threshold},
                            {"stealthy", r.stealthy},
                            {"failures", r.failures}};
  return j.dump(2);
}

}  // namespace fdi::analysis
