#include "fdi/cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "fdi/analysis/analysis.hpp"
#include "fdi/attack/attack.hpp"
#include "fdi/attack/dc_baseline.hpp"
#include "fdi/dataset/dataset.hpp"
#include "fdi/error.hpp"
#include "fdi/estimation/bad_data.hpp"
#include "fdi/estimation/chi_square.hpp"
#include "fdi/estimation/plausibility.hpp"
#include "fdi/grid/case_io.hpp"
#include "fdi/powerflow/flows.hpp"
#include "fdi/powerflow/powerflow.hpp"

namespace fdi::cli {

namespace {

using nlohmann::json;

constexpr double kDeg = 180.0 / std::numbers::pi;

json nan_safe(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json state_json(const grid::NetworkModel& net, const powerflow::OperatingState& s) {
  json rows = json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    rows.push_back({{"bus", net.buses()[i].id}, {"v_mag_pu", s.v_mag[i]}, {"v_ang_deg", s.v_ang[i] * kDeg}});
  }
  return rows;
}

void print_state(std::ostream& out, const grid::NetworkModel& net, const powerflow::OperatingState& s) {
  out << "  bus      V (p.u.)   angle (deg)\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << fmt::format("  {:>3}  {:>12.6f}  {:>12.6f}\n", net.buses()[i].id, s.v_mag[i], s.v_ang[i] * kDeg);
  }
}

powerflow::NoiseModel parse_noise(const std::string& text) {
  powerflow::NoiseModel noise;
  noise.kind = text == "gaussian" ? powerflow::NoiseModel::Kind::Gaussian : powerflow::NoiseModel::Kind::None;
  return noise;
}

// ------------------------------------------------------------- powerflow

struct PowerflowArgs {
  std::string case_spec = "wscc9";
  bool dc = false;
  double tol = 1e-8;
  int max_iter = 50;
  std::string state_out;
  std::string measurements_out;
  std::string noise = "none";
  double sigma = 1.0;
  unsigned long long seed = kDefaultSeed;
};

int run_powerflow(const PowerflowArgs& a, bool as_json, std::ostream& out) {
  const auto net = grid::load_case(a.case_spec);
  json j = {{"case", net.name()}, {"method", a.dc ? "dc" : "ac"}};
  powerflow::OperatingState state;
  if (a.dc) {
    state = powerflow::solve_dc_powerflow(net);
    json flows = json::array();
    for (const auto& br : net.branches()) {
      const auto f = net.index_of(br.from_bus);
      const auto t = net.index_of(br.to_bus);
      flows.push_back({{"from", br.from_bus}, {"to", br.to_bus},
                       {"p_mw", net.base_mva() * (state.v_ang[f] - state.v_ang[t]) / br.x}});
    }
    j["branches"] = flows;
  } else {
    powerflow::AcOptions opts;
    opts.tol = a.tol;
    opts.max_iter = a.max_iter;
    const auto sol = powerflow::solve_ac_powerflow(net, opts);
    state = sol.state;
    j["iterations"] = sol.iterations;
    j["max_mismatch_pu"] = sol.max_mismatch;
    const auto flows = powerflow::compute_branch_flows(net, state);
    json rows = json::array();
    for (std::size_t k = 0; k < flows.branches.size(); ++k) {
      const auto& f = flows.branches[k];
      rows.push_back({{"from", net.branches()[k].from_bus}, {"to", net.branches()[k].to_bus},
                      {"p_from_mw", f.p_from}, {"q_from_mvar", f.q_from}, {"p_to_mw", f.p_to},
                      {"q_to_mvar", f.q_to}, {"p_loss_mw", f.p_loss}, {"q_loss_mvar", f.q_loss}});
    }
    j["branches"] = rows;
  }
  j["buses"] = state_json(net, state);

  if (!a.state_out.empty()) powerflow::write_state_csv(net, state, a.state_out);
  if (!a.measurements_out.empty()) {
    const auto plan = powerflow::default_plan(net, a.sigma);
    const auto set = powerflow::generate_measurements(net, state, plan, parse_noise(a.noise), a.seed);
    powerflow::write_measurements_csv(set, std::filesystem::path(a.measurements_out));
    j["measurements_written"] = set.size();
  }

  if (as_json) {
    out << j.dump(2) << "\n";
    return 0;
  }
  out << fmt::format("case {}: {} power flow", net.name(), a.dc ? "DC" : "AC");
  if (!a.dc) out << fmt::format(", {} iterations, max mismatch {:.2e} p.u.", j["iterations"].get<int>(),
                                j["max_mismatch_pu"].get<double>());
  out << "\n";
  print_state(out, net, state);
  out << "  branch       P from (MW)";
  out << (a.dc ? "\n" : "   Q from (Mvar)   P loss (MW)\n");
  for (const auto& b : j["branches"]) {
    if (a.dc) {
      out << fmt::format("  {:>2}-{:<2}  {:>16.4f}\n", b["from"].get<int>(), b["to"].get<int>(), b["p_mw"].get<double>());
    } else {
      out << fmt::format("  {:>2}-{:<2}  {:>16.4f}  {:>14.4f}  {:>12.4f}\n", b["from"].get<int>(), b["to"].get<int>(),
                         b["p_from_mw"].get<double>(), b["q_from_mvar"].get<double>(), b["p_loss_mw"].get<double>());
    }
  }
  return 0;
}

// -------------------------------------------------------------- estimate

struct EstimateArgs {
  std::string case_spec = "wscc9";
  std::string measurements;
  double significance = estimation::kDefaultSignificance;
  std::string report;  // json | csv; empty: text, or json under --json
  std::string report_out;
};

int run_estimate(const EstimateArgs& a, bool as_json, std::ostream& out) {
  const auto net = grid::load_case(a.case_spec);
  const auto set = powerflow::read_measurements_csv(std::filesystem::path(a.measurements));
  const auto observability = estimation::observability_check(net, powerflow::plan_of(set));
  const auto plaus = estimation::plausibility_check(net, set);
  const auto bdd = estimation::detect_bad_data(net, set, a.significance);

  std::map<int, double> normalized;
  {
    std::vector<int> flagged = bdd.flagged;
    std::sort(flagged.begin(), flagged.end());
    std::size_t k = 0;
    for (const auto& m : set.entries) {
      if (std::binary_search(flagged.begin(), flagged.end(), m.id)) continue;
      normalized[m.id] = bdd.estimate.normalized_residuals.at(k++);
    }
  }

  const std::string format = a.report.empty() ? (as_json ? "json" : "text") : a.report;
  std::ofstream file;
  if (!a.report_out.empty()) {
    file.open(a.report_out, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(fmt::format("cannot write {}", a.report_out));
  }
  std::ostream& dest = a.report_out.empty() ? out : file;

  if (format == "csv") {
    dest << "id,kind,from_bus,to_bus,measured,estimated,normalized_residual,flagged\n";
    for (std::size_t i = 0; i < set.size(); ++i) {
      const auto& m = set.entries[i];
      const auto it = normalized.find(m.id);
      dest << fmt::format("{},{},{},{},{},{},{},{}\n", m.id, powerflow::to_string(m.kind), m.from_bus, m.to_bus,
                          m.value, bdd.calculated_all[i], it == normalized.end() ? std::nan("") : it->second,
                          it == normalized.end() ? 1 : 0);
    }
    return 0;
  }
  if (format == "json") {
    json rows = json::array();
    for (std::size_t i = 0; i < set.size(); ++i) {
      const auto& m = set.entries[i];
      const auto it = normalized.find(m.id);
      rows.push_back({{"id", m.id}, {"measured", m.value}, {"estimated", bdd.calculated_all[i]},
                      {"normalized_residual", it == normalized.end() ? json(nullptr) : nan_safe(it->second)},
                      {"flagged", it == normalized.end()}});
    }
    json violations = json::array();
    for (const auto& v : plaus.violations) violations.push_back({{"id", v.measurement_id}, {"rule", v.rule}});
    const json j = {
        {"case", net.name()},
        {"measurements", set.size()},
        {"observability", {{"observable", observability.observable}, {"rank", observability.rank},
                           {"n_states", observability.n_states}}},
        {"plausibility", {{"passed", plaus.passed}, {"violations", violations}}},
        {"bdd", {{"passed", bdd.passed}, {"resolvable", bdd.resolvable}, {"k_dof", bdd.k_dof},
                 {"threshold", bdd.threshold}, {"flagged", bdd.flagged}, {"j_trace", bdd.j_trace}}},
        {"residual_j", bdd.estimate.residual_j},
        {"iterations", bdd.estimate.iterations},
        {"state", state_json(net, bdd.estimate.estimated_state)},
        {"rows", rows},
    };
    dest << j.dump(2) << "\n";
    return 0;
  }
  dest << fmt::format("case {}: {} measurements\n", net.name(), set.size());
  dest << fmt::format("observability: {} (rank {} of {})\n", observability.observable ? "yes" : "no",
                      observability.rank, observability.n_states);
  dest << fmt::format("plausibility: {} of {} violations\n", plaus.violations.size(), set.size());
  dest << fmt::format("J(x) = {:.6g}, K = {}, threshold = {:.4f}\n", bdd.estimate.residual_j, bdd.k_dof,
                      bdd.threshold);
  dest << fmt::format("bad data: {} ({} flagged{})\n", bdd.passed ? "passed" : "detected", bdd.flagged.size(),
                      bdd.flagged.empty() ? "" : fmt::format(": {}", fmt::join(bdd.flagged, " ")));
  print_state(dest, net, bdd.estimate.estimated_state);
  return 0;
}

// ---------------------------------------------------------------- attack

struct AttackArgs {
  std::string case_spec = "wscc9";
  std::string state;
  std::string measurements;
  int center_bus = 5;
  int seed_bus = 0;  // 0: the center bus
  double delta_deg = 0.5;
  double delta_pu = std::numeric_limits<double>::quiet_NaN();
  std::string out_dir;
};

int run_attack(const AttackArgs& a, bool as_json, std::ostream& out) {
  const auto net = grid::load_case(a.case_spec);
  const auto state = a.state.empty() ? powerflow::solve_ac_powerflow(net).state : powerflow::read_state_csv(net, a.state);
  const auto genuine = a.measurements.empty()
                           ? powerflow::generate_measurements(net, state, powerflow::default_plan(net))
                           : powerflow::read_measurements_csv(std::filesystem::path(a.measurements));

  attack::AttackSpec spec;
  spec.center_bus = a.center_bus;
  spec.seed_bus = a.seed_bus ? a.seed_bus : a.center_bus;
  if (std::isnan(a.delta_pu)) {
    spec.seed_kind = powerflow::VarKind::Angle;
    spec.delta = a.delta_deg;
  } else {
    spec.seed_kind = powerflow::VarKind::Magnitude;
    spec.delta = a.delta_pu;
  }
  const auto r = attack::solve_attack(net, {state, genuine}, spec);

  json branches = json::array();
  for (const auto k : r.area.branches) branches.push_back({net.branches()[k].from_bus, net.branches()[k].to_bus});
  json constraints = json::array();
  for (const auto& c : r.constraints) constraints.push_back(c.describe());
  auto labels = [&](const std::vector<powerflow::StateVariable>& vars) {
    json list = json::array();
    for (const auto& v : vars) list.push_back(attack::label(net, v));
    return list;
  };
  const json manifest = {
      {"case", net.name()},
      {"center_bus", spec.center_bus},
      {"seed", {{"variable", attack::label(net, r.seed)},
                {"delta", spec.delta},
                {"unit", spec.seed_kind == powerflow::VarKind::Angle ? "deg" : "pu"}}},
      {"area", {{"buses", r.area.buses}, {"boundary", r.area.boundary},
                {"no_injection", r.area.interior_no_injection}, {"branches", branches}}},
      {"constraints", constraints},
      {"changeable", labels(r.changeable)},
      {"unknowns", labels(r.unknowns)},
      {"solver", {{"iterations", r.trace.iterations}, {"residual_norms", r.trace.residual_norms},
                  {"final_residual", r.trace.final_residual}, {"jacobian_rank", r.trace.jacobian_rank}}},
      {"manipulated_ids", r.manipulated_ids},
      {"manipulated_count", r.manipulated_ids.size()},
      {"measurements", r.corrupted.size()},
      {"manipulated_state", state_json(net, r.manipulated_state)},
  };

  if (!a.out_dir.empty()) {
    std::filesystem::create_directories(a.out_dir);
    powerflow::write_measurements_csv(r.corrupted, std::filesystem::path(a.out_dir) / "corrupted.csv");
    std::ofstream(std::filesystem::path(a.out_dir) / "attack_manifest.json", std::ios::binary | std::ios::trunc)
        << manifest.dump(2) << "\n";
  }
  if (as_json) {
    out << manifest.dump(2) << "\n";
    return 0;
  }
  out << fmt::format("attack around bus {} with {} {:+g} {}\n", spec.center_bus, attack::label(net, r.seed),
                     spec.delta, spec.seed_kind == powerflow::VarKind::Angle ? "deg" : "p.u.");
  out << fmt::format("area buses: {}\n", fmt::join(r.area.buses, " "));
  out << fmt::format("constraints: {}\n", r.constraints.size());
  for (const auto& c : r.constraints) out << "  " << c.describe() << "\n";
  out << fmt::format("changeable: {}\n", fmt::join(manifest["changeable"].get<std::vector<std::string>>(), " "));
  out << fmt::format("solved in {} iterations, residual {:.2e} p.u., Jacobian rank {}\n", r.trace.iterations,
                     r.trace.final_residual, r.trace.jacobian_rank);
  out << fmt::format("manipulated {} of {} measurements\n", r.manipulated_ids.size(), r.corrupted.size());
  print_state(out, net, r.manipulated_state);
  return 0;
}

// --------------------------------------------------------------- dataset

struct DatasetArgs {
  std::string case_spec = "wscc9";
  std::string demand;
  std::string out_dir;
  std::size_t records_per_file = 432;
  unsigned long long seed = kDefaultSeed;
  int attacks_per_point = 2;
  unsigned threads = 0;
  std::string noise = "none";
  double sigma = 1.0;
  std::size_t long_run = 0;
};

int run_dataset(const DatasetArgs& a, bool as_json, std::ostream& out, std::ostream& err) {
  const auto net = grid::load_case(a.case_spec);
  dataset::DatasetConfig cfg;
  cfg.seed = a.seed;
  cfg.attacks_per_point = a.attacks_per_point;
  cfg.records_per_file = a.records_per_file;
  cfg.threads = a.threads;
  cfg.noise = parse_noise(a.noise);
  cfg.sigma = a.sigma;
  cfg.log = [&err](const std::string& note) { err << "skip: " << note << "\n"; };

  dataset::DemandProfile profile;
  if (a.long_run > 0) {
    profile = dataset::synthetic_profile(a.long_run, 10, dataset::parse_timestamp("2018-01-01 00:00"), 200.0, 330.0,
                                         a.seed);
  } else {
    if (a.demand.empty() || a.out_dir.empty()) throw InvalidArgument("--demand and --out are required");
    profile = dataset::ingest_demand_csv(std::filesystem::path(a.demand));
  }

  std::unique_ptr<dataset::DatasetWriter> writer;
  if (!a.out_dir.empty()) writer = std::make_unique<dataset::DatasetWriter>(a.out_dir, a.records_per_file);

  // Throughput checkpoints every tenth of the profile, for the long-run mode.
  const auto t0 = std::chrono::steady_clock::now();
  json checkpoints = json::array();
  std::size_t points_seen = 0;
  std::size_t next_mark = std::max<std::size_t>(1, profile.size() / 10);
  std::int64_t last_time = std::numeric_limits<std::int64_t>::min();
  auto sink = [&](dataset::DatasetRecord&& r) {
    if (r.time != last_time) {
      last_time = r.time;
      ++points_seen;
      if (points_seen == next_mark || points_seen == profile.size()) {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        checkpoints.push_back({{"points", points_seen}, {"seconds", secs}});
        next_mark += std::max<std::size_t>(1, profile.size() / 10);
      }
    }
    if (writer) writer->add(r);
  };
  const auto stats = dataset::generate_dataset(profile, net, cfg, sink);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json j = {{"points", stats.points},       {"normal_records", stats.normal},
            {"attack_records", stats.attack}, {"skipped", {{"normal", stats.skipped_normal}, {"attack", stats.skipped_attack}}},
            {"seconds", seconds},           {"points_per_second", seconds > 0 ? stats.points / seconds : 0.0}};
  if (a.long_run > 0) j["checkpoints"] = checkpoints;
  if (writer) {
    const auto m = writer->finish(cfg.seed, dataset::config_digest(cfg, net.name()), stats);
    j["manifest"] = json::parse(dataset::to_json(m));
    j["out"] = a.out_dir;
  }

  if (as_json) {
    out << j.dump(2) << "\n";
    return 0;
  }
  out << fmt::format("{} points: {} normal, {} attack records ({} / {} skipped) in {:.2f} s ({:.1f} points/s)\n",
                     stats.points, stats.normal, stats.attack, stats.skipped_normal, stats.skipped_attack, seconds,
                     j["points_per_second"].get<double>());
  if (a.long_run > 0) {
    out << "  points     seconds   us/point\n";
    for (const auto& c : checkpoints) {
      const auto n = c["points"].get<std::size_t>();
      const auto s = c["seconds"].get<double>();
      out << fmt::format("  {:>6}  {:>10.3f}  {:>9.1f}\n", n, s, 1e6 * s / static_cast<double>(n));
    }
  }
  if (writer) {
    out << fmt::format("wrote {} files to {}\n", j["manifest"]["files"].size(), a.out_dir);
    out << fmt::format("content digest {}\n", j["manifest"]["content_digest"].get<std::string>());
  }
  return 0;
}

// --------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string case_spec = "wscc9";
  std::string dataset_dir;
  long normal_id = 0;
  long attack_id = 0;
  double significance = estimation::kDefaultSignificance;
};

int run_analyze(const AnalyzeArgs& a, bool as_json, std::ostream& out) {
  const auto net = grid::load_case(a.case_spec);
  const auto normals = dataset::read_dataset_dir(a.dataset_dir, dataset::Label::Normal);
  const auto attacks = dataset::read_dataset_dir(a.dataset_dir, dataset::Label::Attack);
  std::map<std::int64_t, const dataset::DatasetRecord*> normal_at;
  for (const auto& r : normals) normal_at.emplace(r.time, &r);

  auto by_id = [](const std::vector<dataset::DatasetRecord>& list, long id, const char* what) {
    const auto it = std::find_if(list.begin(), list.end(), [id](const auto& r) { return r.record_id == id; });
    if (it == list.end()) throw InvalidArgument(fmt::format("no {} record {}", what, id));
    return &*it;
  };
  auto partner = [&](const dataset::DatasetRecord& attack) {
    const auto it = normal_at.find(attack.time);
    if (it == normal_at.end()) {
      throw PairingError(fmt::format("no normal record at {}", dataset::format_timestamp(attack.time)));
    }
    return it->second;
  };

  if (a.attack_id || a.normal_id) {
    const auto* attack = a.attack_id ? by_id(attacks, a.attack_id, "attack") : nullptr;
    const auto* normal = a.normal_id ? by_id(normals, a.normal_id, "normal") : partner(*attack);
    if (!attack) attack = normal;
    const auto report = analysis::analyze_pair(net, *normal, *attack, a.significance);
    if (as_json) {
      out << analysis::to_json(report) << "\n";
      return 0;
    }
    out << fmt::format("normal record {} vs attack record {} at {}\n", normal->record_id, attack->record_id,
                       dataset::format_timestamp(attack->time));
    for (const auto* audit : {&report.normal, &report.attack}) {
      out << (audit == &report.normal ? "normal" : "attack") << ":\n";
      for (const auto& b : audit->buses) {
        out << fmt::format("  bus {}: |sum P| = {:.3e} MW, |sum Q| = {:.3e} Mvar\n", b.bus, b.sum_p, b.sum_q);
      }
      out << fmt::format("  global mismatch P {:.3e} MW, Q {:.3e} Mvar\n", audit->global_p, audit->global_q);
      out << fmt::format("  J(x) = {:.4g}\n", audit->residual_j);
    }
    out << fmt::format("threshold {:.4f} (K = {})\n", report.threshold, report.k_dof);
    out << "verdict: " << (report.stealthy ? "stealthy" : "detectable") << "\n";
    for (const auto& f : report.failures) out << "  " << f << "\n";
    return 0;
  }

  std::size_t pairs = 0;
  std::size_t stealthy = 0;
  double max_bus = 0.0;
  double max_global = 0.0;
  double max_j_normal = 0.0;
  double max_j_attack = 0.0;
  double threshold = 0.0;
  std::vector<std::string> failures;
  for (const auto& attack : attacks) {
    const auto report = analysis::analyze_pair(net, *partner(attack), attack, a.significance);
    ++pairs;
    if (report.stealthy) ++stealthy;
    threshold = report.threshold;
    for (const auto& b : report.attack.buses) max_bus = std::max({max_bus, b.sum_p, b.sum_q});
    max_global = std::max({max_global, std::abs(report.attack.global_p), std::abs(report.attack.global_q)});
    max_j_normal = std::max(max_j_normal, report.normal.residual_j);
    max_j_attack = std::max(max_j_attack, report.attack.residual_j);
    for (const auto& f : report.failures) {
      if (failures.size() < 10) failures.push_back(fmt::format("attack {}: {}", attack.record_id, f));
    }
  }
  const json j = {{"pairs", pairs},
                  {"stealthy", stealthy},
                  {"max_abs_bus_sum", max_bus},
                  {"max_abs_global_mismatch", max_global},
                  {"max_j_normal", max_j_normal},
                  {"max_j_attack", max_j_attack},
                  {"threshold", threshold},
                  {"failures", failures}};
  if (as_json) {
    out << j.dump(2) << "\n";
    return 0;
  }
  out << fmt::format("{} attack records audited, {} stealthy\n", pairs, stealthy);
  out << fmt::format("max |bus sum| {:.3e}, max |global mismatch| {:.3e}\n", max_bus, max_global);
  out << fmt::format("max J normal {:.3e}, attack {:.3e}, threshold {:.4f}\n", max_j_normal, max_j_attack, threshold);
  for (const auto& f : failures) out << "  " << f << "\n";
  return 0;
}

// ----------------------------------------------------------- dc-baseline

struct DcArgs {
  std::string case_spec = "wscc9";
  int trials = 100;
  unsigned long long seed = kDefaultSeed;
  double magnitude = 0.05;
  double significance = estimation::kDefaultSignificance;
};

int run_dc_baseline(const DcArgs& a, bool as_json, std::ostream& out) {
  const auto net = grid::load_case(a.case_spec);
  attack::DcBaselineOptions opts;
  opts.trials = a.trials;
  opts.seed = a.seed;
  opts.magnitude = a.magnitude;
  opts.significance = a.significance;
  const auto r = attack::dc_baseline_experiment(net, opts);
  double min_j = std::numeric_limits<double>::infinity();
  for (const double v : r.first_pass_j) {
    if (std::isfinite(v)) min_j = std::min(min_j, v);
  }
  const int k = static_cast<int>(powerflow::default_plan(net).entries.size()) - static_cast<int>(2 * net.bus_count() - 1);
  const double threshold = estimation::chi_square_threshold(k, a.significance);
  const json j = {{"trials", r.trials},   {"diverged", r.diverged}, {"flagged", r.flagged},
                  {"bypassed", r.bypassed}, {"threshold", threshold}, {"min_first_pass_j", nan_safe(min_j)},
                  {"seed", a.seed}};
  if (as_json) {
    out << j.dump(2) << "\n";
    return 0;
  }
  out << fmt::format("{} trials: {} diverged, {} flagged, {} bypassed\n", r.trials, r.diverged, r.flagged, r.bypassed);
  out << fmt::format("smallest first-pass J {:.4g} against threshold {:.4f}\n", min_j, threshold);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Power-grid state estimation and false data injection workbench", "fdi"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "Machine-readable JSON output");

  const auto noise_kinds = CLI::IsMember({"none", "gaussian"});

  PowerflowArgs pf;
  auto* pf_cmd = app.add_subcommand("powerflow", "Solve an AC (or DC) power flow");
  pf_cmd->add_option("--case", pf.case_spec, "wscc9, a case JSON file or a CSV case directory")->capture_default_str();
  auto* dc_flag = pf_cmd->add_flag("--dc", pf.dc, "Linear DC power flow");
  pf_cmd->add_option("--tol", pf.tol, "Mismatch tolerance, p.u.")->capture_default_str();
  pf_cmd->add_option("--max-iter", pf.max_iter, "Newton iteration limit")->capture_default_str();
  pf_cmd->add_option("--state-out", pf.state_out, "Write the solved state as CSV");
  pf_cmd->add_option("--measurements-out", pf.measurements_out, "Write the default measurement set as CSV")
      ->excludes(dc_flag);
  pf_cmd->add_option("--noise", pf.noise, "Measurement noise")->check(noise_kinds)->capture_default_str();
  pf_cmd->add_option("--sigma", pf.sigma, "Meter standard deviation, MW or Mvar")->capture_default_str();
  pf_cmd->add_option("--seed", pf.seed, "Noise seed")->capture_default_str();

  EstimateArgs est;
  auto* est_cmd = app.add_subcommand("estimate", "WLS state estimation with bad-data detection");
  est_cmd->add_option("--case", est.case_spec, "Case")->capture_default_str();
  est_cmd->add_option("--measurements", est.measurements, "Measurement CSV")->required();
  est_cmd->add_option("--significance", est.significance, "Chi-square significance")->capture_default_str();
  est_cmd->add_option("--report", est.report, "Report format")->check(CLI::IsMember({"json", "csv"}));
  est_cmd->add_option("--report-out", est.report_out, "Write the report to a file");

  AttackArgs atk;
  auto* atk_cmd = app.add_subcommand("attack", "Design a stealthy AC false data injection attack");
  atk_cmd->add_option("--case", atk.case_spec, "Case")->capture_default_str();
  atk_cmd->add_option("--state", atk.state, "Genuine state CSV (default: solve the power flow)");
  atk_cmd->add_option("--measurements", atk.measurements, "Genuine measurement CSV (default: noiseless set)");
  atk_cmd->add_option("--center-bus", atk.center_bus, "Attack center bus")->capture_default_str();
  atk_cmd->add_option("--seed-bus", atk.seed_bus, "Bus of the seed variable (default: center bus)");
  auto* deg = atk_cmd->add_option("--delta-deg", atk.delta_deg, "Seed angle change, degrees")->capture_default_str();
  atk_cmd->add_option("--delta-pu", atk.delta_pu, "Seed magnitude change, p.u. (instead of an angle)")->excludes(deg);
  atk_cmd->add_option("--out", atk.out_dir, "Write corrupted.csv and attack_manifest.json here");

  DatasetArgs ds;
  auto* ds_cmd = app.add_subcommand("dataset", "Generate labeled normal/attack records from a demand series");
  ds_cmd->add_option("--case", ds.case_spec, "Case")->capture_default_str();
  ds_cmd->add_option("--demand", ds.demand, "Demand CSV (timestamp,demand_mw)");
  ds_cmd->add_option("--out", ds.out_dir, "Output directory");
  ds_cmd->add_option("--records-per-file", ds.records_per_file, "Records per partition")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ds_cmd->add_option("--seed", ds.seed, "Generation seed")->capture_default_str();
  ds_cmd->add_option("--attacks-per-point", ds.attacks_per_point, "Attack records per time stamp")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ds_cmd->add_option("--threads", ds.threads, "Worker threads (0: all cores)")->capture_default_str();
  ds_cmd->add_option("--noise", ds.noise, "Measurement noise")->check(noise_kinds)->capture_default_str();
  ds_cmd->add_option("--sigma", ds.sigma, "Meter standard deviation")->capture_default_str();
  ds_cmd->add_option("--long-run", ds.long_run,
                     "Synthesize this many 10-minute points and report throughput; files only with --out")
      ->check(CLI::PositiveNumber);

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("analyze", "Audit normal/attack record pairs of a dataset");
  an_cmd->add_option("--case", an.case_spec, "Case")->capture_default_str();
  an_cmd->add_option("--dataset", an.dataset_dir, "Dataset directory")->required();
  an_cmd->add_option("--normal-id", an.normal_id, "Normal record id");
  an_cmd->add_option("--attack-id", an.attack_id, "Attack record id (paired by time stamp by default)");
  an_cmd->add_option("--significance", an.significance, "Chi-square significance")->capture_default_str();

  DcArgs dc;
  auto* dc_cmd = app.add_subcommand("dc-baseline", "Random a = Hc attacks from the DC model against the AC estimator");
  dc_cmd->add_option("--case", dc.case_spec, "Case")->capture_default_str();
  dc_cmd->add_option("--trials", dc.trials, "Number of random c vectors")->check(CLI::PositiveNumber)->capture_default_str();
  dc_cmd->add_option("--seed", dc.seed, "Seed for c")->capture_default_str();
  dc_cmd->add_option("--magnitude", dc.magnitude, "c entries are uniform in +-magnitude rad")->capture_default_str();
  dc_cmd->add_option("--significance", dc.significance, "Chi-square significance")->capture_default_str();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return 2;
  }

  try {
    if (pf_cmd->parsed()) return run_powerflow(pf, as_json, out);
    if (est_cmd->parsed()) return run_estimate(est, as_json, out);
    if (atk_cmd->parsed()) return run_attack(atk, as_json, out);
    if (ds_cmd->parsed()) return run_dataset(ds, as_json, out, err);
    if (an_cmd->parsed()) return run_analyze(an, as_json, out);
    if (dc_cmd->parsed()) return run_dc_baseline(dc, as_json, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace fdi::cli
