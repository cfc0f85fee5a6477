#include "fdi/powerflow/flows.hpp"

#include <cmath>

namespace fdi::powerflow {

VariableIndex::VariableIndex(const std::vector<StateVariable>& vars, std::size_t bus_count)
    : angle(bus_count, -1), magnitude(bus_count, -1) {
  for (std::size_t k = 0; k < vars.size(); ++k) {
    auto& slot = vars[k].kind == VarKind::Angle ? angle : magnitude;
    slot[vars[k].bus] = static_cast<int>(k);
  }
}

FlowEvaluator::FlowEvaluator(const grid::NetworkModel& network) : incident_(network.bus_count()) {
  for (std::size_t k = 0; k < network.branch_count(); ++k) {
    const auto& br = network.branches()[k];
    admittance_.push_back(grid::branch_admittance(br));
    from_.push_back(network.index_of(br.from_bus));
    to_.push_back(network.index_of(br.to_bus));
    incident_[from_.back()].push_back({k, Side::From});
    incident_[to_.back()].push_back({k, Side::To});
  }
}

std::size_t FlowEvaluator::near_bus(const BranchEnd& end) const {
  return end.side == Side::From ? from_[end.branch] : to_[end.branch];
}

std::size_t FlowEvaluator::far_bus(const BranchEnd& end) const {
  return end.side == Side::From ? to_[end.branch] : from_[end.branch];
}

namespace {

struct EndTerms {
  double g_self, b_self, g_mut, b_mut;
};

EndTerms end_terms(const grid::BranchAdmittance& a, Side side) {
  const auto self = side == Side::From ? a.ff : a.tt;
  const auto mut = side == Side::From ? a.ft : a.tf;
  return {self.real(), self.imag(), mut.real(), mut.imag()};
}

}  // namespace

grid::Complex FlowEvaluator::end_power(const OperatingState& state, const BranchEnd& end) const {
  const auto n = near_bus(end);
  const auto m = far_bus(end);
  const auto t = end_terms(admittance_[end.branch], end.side);
  const double vn = state.v_mag[n];
  const double vm = state.v_mag[m];
  const double d = state.v_ang[n] - state.v_ang[m];
  const double c = std::cos(d);
  const double s = std::sin(d);
  const double p = vn * vn * t.g_self + vn * vm * (t.g_mut * c + t.b_mut * s);
  const double q = -vn * vn * t.b_self + vn * vm * (t.g_mut * s - t.b_mut * c);
  return {p, q};
}

FlowEvaluator::Partials FlowEvaluator::end_partials(const OperatingState& state, const BranchEnd& end) const {
  const auto n = near_bus(end);
  const auto m = far_bus(end);
  const auto t = end_terms(admittance_[end.branch], end.side);
  const double vn = state.v_mag[n];
  const double vm = state.v_mag[m];
  const double d = state.v_ang[n] - state.v_ang[m];
  const double c = std::cos(d);
  const double s = std::sin(d);
  const double a = t.g_mut * c + t.b_mut * s;  // in-phase coupling
  const double b = t.g_mut * s - t.b_mut * c;  // quadrature coupling

  Partials out{};
  out.dp[0] = -vn * vm * b;
  out.dp[1] = 2.0 * vn * t.g_self + vm * a;
  out.dp[2] = vn * vm * b;
  out.dp[3] = vn * a;
  out.dq[0] = vn * vm * a;
  out.dq[1] = -2.0 * vn * t.b_self + vm * b;
  out.dq[2] = -vn * vm * a;
  out.dq[3] = vn * b;
  return out;
}

double FlowEvaluator::evaluate(const OperatingState& state, const FlowFunctional& f) const {
  double sum = 0.0;
  for (const auto& [end, coeff] : f.terms) {
    const auto sp = end_power(state, end);
    sum += coeff * (f.quantity == Quantity::P ? sp.real() : sp.imag());
  }
  return sum;
}

void FlowEvaluator::gradient(const OperatingState& state, const FlowFunctional& f, const VariableIndex& index,
                             Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) const {
  for (const auto& [end, coeff] : f.terms) {
    const auto partials = end_partials(state, end);
    const auto& d = f.quantity == Quantity::P ? partials.dp : partials.dq;
    const std::size_t buses[2] = {near_bus(end), far_bus(end)};
    for (int side = 0; side < 2; ++side) {
      if (const int col = index.angle[buses[side]]; col >= 0) row(col) += coeff * d[2 * side];
      if (const int col = index.magnitude[buses[side]]; col >= 0) row(col) += coeff * d[2 * side + 1];
    }
  }
}

FlowFunctional FlowEvaluator::injection(std::size_t bus, Quantity q) const {
  FlowFunctional f{q, {}};
  for (const auto& end : incident_[bus]) f.terms.emplace_back(end, 1.0);
  return f;
}

BranchFlowSet compute_branch_flows(const grid::NetworkModel& network, const OperatingState& state) {
  const FlowEvaluator eval(network);
  const double base = network.base_mva();
  BranchFlowSet out;
  out.branches.reserve(network.branch_count());
  for (std::size_t k = 0; k < network.branch_count(); ++k) {
    const auto sf = eval.end_power(state, {k, Side::From}) * base;
    const auto st = eval.end_power(state, {k, Side::To}) * base;
    out.branches.push_back(
        {sf.real(), sf.imag(), st.real(), st.imag(), sf.real() + st.real(), sf.imag() + st.imag()});
  }
  return out;
}

BusInjections compute_injections(const grid::NetworkModel& network, const OperatingState& state) {
  const auto flows = compute_branch_flows(network, state);
  BusInjections inj{std::vector<double>(network.bus_count(), 0.0), std::vector<double>(network.bus_count(), 0.0)};
  for (std::size_t k = 0; k < network.branch_count(); ++k) {
    const auto& br = network.branches()[k];
    const auto f = network.index_of(br.from_bus);
    const auto t = network.index_of(br.to_bus);
    inj.p[f] += flows.branches[k].p_from;
    inj.q[f] += flows.branches[k].q_from;
    inj.p[t] += flows.branches[k].p_to;
    inj.q[t] += flows.branches[k].q_to;
  }
  return inj;
}

}  // namespace fdi::powerflow
