#include "fdi/dataset/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <optional>
#include <random>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "fdi/attack/attack.hpp"
#include "fdi/csv.hpp"
#include "fdi/error.hpp"
#include "fdi/powerflow/powerflow.hpp"

namespace fdi::dataset {

using powerflow::MeasurementSet;

std::string to_string(Label label) { return label == Label::Normal ? "normal" : "attack"; }

Label parse_label(const std::string& text) {
  if (text == "normal") return Label::Normal;
  if (text == "attack") return Label::Attack;
  throw InvalidArgument(fmt::format("unknown record label '{}'", text));
}

std::size_t DatasetRecord::manipulated_rows() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const RecordRow& r) {
    return r.provenance == powerflow::Provenance::Manipulated;
  }));
}

std::size_t DatasetRecord::flagged_rows() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const RecordRow& r) { return r.bdd_flag; }));
}

MeasurementSet DatasetRecord::measurements() const {
  MeasurementSet set;
  for (const auto& r : rows) set.entries.push_back({r.measurement_id, r.kind, r.from_bus, r.to_bus, r.measured, 1.0, r.provenance});
  return set;
}

double deviation_percent(double measured, double estimated) {
  return 100.0 * (measured - estimated) / std::max(std::abs(estimated), 1.0);
}

// ---------------------------------------------------------------- digests

class detail::Sha256 {
 public:
  Sha256() {
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 initialisation failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;
  void update(const std::string& bytes) { EVP_DigestUpdate(ctx, bytes.data(), bytes.size()); }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    std::string out;
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
    return out;
  }

 private:
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
};

std::string sha256_hex(const std::string& bytes) {
  detail::Sha256 h;
  h.update(bytes);
  return h.hex();
}

std::string config_digest(const DatasetConfig& config, const std::string& case_name) {
  const nlohmann::json j = {
      {"case", case_name},
      {"seed", config.seed},
      {"attacks_per_point", config.attacks_per_point},
      {"center_bus", config.center_bus},
      {"deltas_deg", config.deltas_deg},
      {"significance", config.significance},
      {"sigma", config.sigma},
      {"noise", config.noise.kind == powerflow::NoiseModel::Kind::Gaussian ? "gaussian" : "none"},
      {"records_per_file", config.records_per_file},
  };
  return sha256_hex(j.dump());
}

// ------------------------------------------------------------- generation

namespace {

std::mt19937_64 point_rng(std::uint64_t seed, std::size_t index, std::uint32_t stream) {
  const auto i = static_cast<std::uint64_t>(index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32), stream};
  return std::mt19937_64(seq);
}

struct PointOutcome {
  std::optional<DatasetRecord> normal;
  std::vector<DatasetRecord> attacks;
  std::size_t skipped_normal = 0;
  std::size_t skipped_attack = 0;
  std::vector<std::string> notes;
};

PointOutcome run_point(const DemandPoint& point, std::size_t index, const grid::NetworkModel& network,
                       const DatasetConfig& config, bool normal, bool attack) {
  PointOutcome out;
  const auto when = format_timestamp(point.time);
  const std::size_t attack_count = attack ? static_cast<std::size_t>(config.attacks_per_point) : 0;

  std::optional<grid::NetworkModel> scaled;
  powerflow::OperatingState state;
  MeasurementSet genuine;
  try {
    scaled = scale_loads(network, point.demand_mw);
    state = powerflow::solve_ac_powerflow(*scaled).state;
    const auto plan = powerflow::default_plan(*scaled, config.sigma);
    genuine = powerflow::generate_measurements(*scaled, state, plan, config.noise, point_rng(config.seed, index, 1)());
  } catch (const Error& e) {
    out.notes.push_back(fmt::format("{}: power flow at {:.3f} MW failed: {}", when, point.demand_mw, e.what()));
    out.skipped_normal = normal ? 1 : 0;
    out.skipped_attack = attack_count;
    return out;
  }

  if (normal) {
    try {
      const auto bdd = estimation::detect_bad_data(*scaled, genuine, config.significance);
      out.normal = make_record(Label::Normal, point.time, genuine, bdd);
    } catch (const Error& e) {
      out.notes.push_back(fmt::format("{}: normal record skipped: {}", when, e.what()));
      out.skipped_normal = 1;
    }
  }
  if (attack) {
    const attack::AttackBaseline baseline{state, genuine};
    for (const double delta : attack_deltas(config, index)) {
      try {
        const auto result = attack::solve_attack(*scaled, baseline, attack::AttackSpec::angle(config.center_bus, delta));
        const auto bdd = estimation::detect_bad_data(*scaled, result.corrupted, config.significance);
        out.attacks.push_back(make_record(Label::Attack, point.time, result.corrupted, bdd));
      } catch (const Error& e) {
        out.notes.push_back(fmt::format("{}: attack {:+.1f} deg skipped: {}", when, delta, e.what()));
        ++out.skipped_attack;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<double> attack_deltas(const DatasetConfig& config, std::size_t point_index) {
  if (config.deltas_deg.empty()) throw InvalidArgument("no attack magnitudes configured");
  if (config.attacks_per_point < 0) throw InvalidArgument("attacks per point must be non-negative");
  auto rng = point_rng(config.seed, point_index, 0);
  std::uniform_int_distribution<std::size_t> pick(0, config.deltas_deg.size() - 1);
  std::vector<double> deltas;
  for (int k = 0; k < config.attacks_per_point; ++k) {
    const double size = config.deltas_deg[pick(rng)];
    deltas.push_back(k % 2 == 0 ? size : -size);
  }
  return deltas;
}

DatasetRecord make_record(Label label, std::int64_t time, const MeasurementSet& set, const estimation::BddReport& bdd) {
  if (bdd.calculated_all.size() != set.size()) throw DimensionError("estimate does not cover the measurement set");
  const std::unordered_set<int> flagged(bdd.flagged.begin(), bdd.flagged.end());
  DatasetRecord record;
  record.time = time;
  record.label = label;
  record.rows.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& m = set.entries[i];
    const double est = bdd.calculated_all[i];
    record.rows.push_back({m.id, m.kind, m.from_bus, m.to_bus, m.value, est, deviation_percent(m.value, est),
                           flagged.count(m.id) > 0, m.provenance});
  }
  return record;
}

GenerationStats generate_dataset(const DemandProfile& profile, const grid::NetworkModel& network,
                                 const DatasetConfig& config, const RecordSink& sink, bool normal, bool attack) {
  if (attack) attack_deltas(config, 0);  // validate once up front
  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  const std::size_t block = std::size_t{64} * threads;

  GenerationStats stats;
  long next_normal = 1;
  long next_attack = 1;
  std::vector<PointOutcome> outcomes;
  for (std::size_t begin = 0; begin < profile.size(); begin += block) {
    const std::size_t end = std::min(profile.size(), begin + block);
    outcomes.assign(end - begin, {});
    std::vector<std::exception_ptr> failures(threads);
    auto work = [&](unsigned t) {
      try {
        for (std::size_t i = begin + t; i < end; i += threads) {
          outcomes[i - begin] = run_point(profile.points[i], i, network, config, normal, attack);
        }
      } catch (...) {
        failures[t] = std::current_exception();
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
      for (auto& th : pool) th.join();
    }
    for (const auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }

    for (auto& o : outcomes) {
      ++stats.points;
      stats.skipped_normal += o.skipped_normal;
      stats.skipped_attack += o.skipped_attack;
      if (config.log) {
        for (const auto& note : o.notes) config.log(note);
      }
      if (o.normal) {
        o.normal->record_id = next_normal++;
        ++stats.normal;
        sink(std::move(*o.normal));
      }
      for (auto& r : o.attacks) {
        r.record_id = next_attack++;
        ++stats.attack;
        sink(std::move(r));
      }
    }
  }
  return stats;
}

std::vector<DatasetRecord> generate_normal_records(const DemandProfile& profile, const grid::NetworkModel& network,
                                                   const DatasetConfig& config) {
  std::vector<DatasetRecord> out;
  generate_dataset(profile, network, config, [&](DatasetRecord&& r) { out.push_back(std::move(r)); }, true, false);
  return out;
}

std::vector<DatasetRecord> generate_attack_records(const DemandProfile& profile, const grid::NetworkModel& network,
                                                   const DatasetConfig& config) {
  std::vector<DatasetRecord> out;
  generate_dataset(profile, network, config, [&](DatasetRecord&& r) { out.push_back(std::move(r)); }, false, true);
  return out;
}

// ----------------------------------------------------------------- output

std::string to_json(const DatasetManifest& m) {
  const nlohmann::json j = {
      {"counts", {{"normal", m.normal_records}, {"attack", m.attack_records}, {"total", m.total_records}}},
      {"attributes_per_row", m.attributes_per_row},
      {"measurements_per_record", m.measurements_per_record},
      {"records_per_file", m.records_per_file},
      {"seed", m.seed},
      {"config_digest", m.config_digest},
      {"content_digest", m.content_digest},
      {"skipped", {{"normal", m.skipped_normal}, {"attack", m.skipped_attack}}},
      {"files", m.files},
  };
  return j.dump(2) + "\n";
}

namespace {

constexpr const char* kSchema = R"(# Dataset schema

Each CSV partition holds whole records. A record is one estimation snapshot
(one "sheet"): one row per measurement, all rows sharing `record_id`,
`timestamp` and `label`. `normal_NNNN.csv` files hold genuine snapshots and
`attack_NNNN.csv` files hold snapshots with stealthy false data injected.

| # | column | meaning |
|---|--------|---------|
| - | record_id | 1-based record number within its label |
| - | timestamp | demand time stamp, UTC, ISO-8601 |
| - | label | `normal` or `attack` |
| 1 | measurement_id | meter id, 1-based |
| 2 | kind | `P_FLOW`, `Q_FLOW`, `P_INJ` or `Q_INJ` |
| 3 | from_bus | metering bus |
| 4 | to_bus | far bus of a flow meter; equals from_bus for injections |
| 5 | measured | telemetered value, MW or Mvar |
| 6 | estimated | value recomputed from the estimated state, MW or Mvar |
| 7 | deviation_pct | 100 (measured - estimated) / max(abs(estimated), 1) |
| 8 | bdd_flag | 1 when bad-data detection removed the meter, else 0 |
| 9 | provenance | `genuine` or `manipulated` |

Interpretation note: only the number of per-measurement attributes (nine) is
fixed by the dataset design. Which nine are recorded, and their order, is an
interpretation chosen for this generator.

`manifest.json` lists record counts, skipped points, the seed, a digest of
the generation settings and a SHA-256 digest of the partition contents.
)";

}  // namespace

struct DatasetWriter::Partition {
  std::string prefix;
  std::ofstream out;
  std::size_t file_index = 0;
  std::size_t in_file = 0;
  std::size_t count = 0;
};

DatasetWriter::DatasetWriter(std::filesystem::path out_dir, std::size_t records_per_file)
    : out_dir_(std::move(out_dir)),
      records_per_file_(records_per_file),
      normal_(std::make_unique<Partition>()),
      attack_(std::make_unique<Partition>()),
      hasher_(std::make_unique<detail::Sha256>()) {
  if (records_per_file_ == 0) throw InvalidArgument("records per file must be positive");
  std::filesystem::create_directories(out_dir_);
  normal_->prefix = "normal";
  attack_->prefix = "attack";
}

DatasetWriter::~DatasetWriter() = default;

void DatasetWriter::add(const DatasetRecord& record) {
  if (measurements_per_record_ == 0) measurements_per_record_ = record.rows.size();
  if (record.rows.size() != measurements_per_record_) {
    throw DimensionError(fmt::format("record has {} rows, expected {}", record.rows.size(), measurements_per_record_));
  }
  write(record.label == Label::Normal ? *normal_ : *attack_, record);
}

void DatasetWriter::write(Partition& part, const DatasetRecord& record) {
  if (!part.out.is_open() || part.in_file == records_per_file_) {
    if (part.out.is_open()) part.out.close();
    const auto name = fmt::format("{}_{:04}.csv", part.prefix, ++part.file_index);
    part.out.open(out_dir_ / name, std::ios::binary | std::ios::trunc);
    if (!part.out) throw Error(fmt::format("cannot write {}", (out_dir_ / name).string()));
    files_.push_back(name);
    part.in_file = 0;
    const std::string header = std::string(kRecordHeader) + "\n";
    part.out << header;
    hasher_->update(name);
    hasher_->update(header);
  }
  fmt::memory_buffer buf;
  const auto when = format_timestamp(record.time);
  const auto label = to_string(record.label);
  for (const auto& r : record.rows) {
    fmt::format_to(std::back_inserter(buf), "{},{},{},{},{},{},{},{},{},{},{},{}\n", record.record_id, when, label,
                   r.measurement_id, powerflow::to_string(r.kind), r.from_bus, r.to_bus, r.measured, r.estimated,
                   r.deviation_pct, r.bdd_flag ? 1 : 0, powerflow::to_string(r.provenance));
  }
  const std::string text = fmt::to_string(buf);
  part.out << text;
  hasher_->update(text);
  ++part.in_file;
  ++part.count;
}

DatasetManifest DatasetWriter::finish(std::uint64_t seed, const std::string& digest, const GenerationStats& stats) {
  for (auto* part : {normal_.get(), attack_.get()}) {
    if (part->out.is_open()) {
      part->out.close();
      if (!part->out) throw Error(fmt::format("failed writing {} partition", part->prefix));
    }
  }
  DatasetManifest m;
  m.normal_records = normal_->count;
  m.attack_records = attack_->count;
  m.total_records = m.normal_records + m.attack_records;
  m.measurements_per_record = measurements_per_record_;
  m.records_per_file = records_per_file_;
  m.seed = seed;
  m.config_digest = digest;
  m.content_digest = hasher_->hex();
  m.skipped_normal = stats.skipped_normal;
  m.skipped_attack = stats.skipped_attack;
  m.files = files_;

  std::ofstream(out_dir_ / "manifest.json", std::ios::binary | std::ios::trunc) << to_json(m);
  std::ofstream(out_dir_ / "SCHEMA.md", std::ios::binary | std::ios::trunc) << kSchema;
  return m;
}

DatasetManifest write_dataset(const std::vector<DatasetRecord>& records, const std::filesystem::path& out_dir,
                              std::size_t records_per_file, std::uint64_t seed, const std::string& config_digest,
                              const GenerationStats& stats) {
  DatasetWriter writer(out_dir, records_per_file);
  for (const auto& r : records) writer.add(r);
  return writer.finish(seed, config_digest, stats);
}

std::vector<DatasetRecord> read_dataset_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file", path.string(), 0);
  csv::Reader reader(in, path.string());
  std::vector<std::string> header;
  std::vector<std::string> expected;
  {
    std::string all = kRecordHeader;
    std::size_t start = 0;
    while (true) {
      const auto comma = all.find(',', start);
      expected.push_back(all.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  reader.expect_header(expected);

  std::vector<DatasetRecord> records;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() != expected.size()) {
      throw ParseError(fmt::format("expected {} fields, got {}", expected.size(), f.size()), reader.source(),
                       reader.line());
    }
    const long id = reader.to_int(f[0], "record_id");
    std::int64_t time = 0;
    Label label{};
    RecordRow row;
    try {
      time = parse_timestamp(f[1]);
      label = parse_label(f[2]);
      row.kind = powerflow::parse_measurement_kind(f[4]);
      row.provenance = powerflow::parse_provenance(f[11]);
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), reader.source(), reader.line());
    }
    row.measurement_id = reader.to_int(f[3], "measurement_id");
    row.from_bus = reader.to_int(f[5], "from_bus");
    row.to_bus = reader.to_int(f[6], "to_bus");
    row.measured = reader.to_double(f[7], "measured");
    row.estimated = reader.to_double(f[8], "estimated");
    row.deviation_pct = reader.to_double(f[9], "deviation_pct");
    row.bdd_flag = reader.to_int(f[10], "bdd_flag") != 0;
    if (records.empty() || records.back().record_id != id || records.back().label != label) {
      records.push_back({id, time, label, {}});
    } else if (records.back().time != time) {
      throw ParseError(fmt::format("record {} changes timestamp mid-record", id), reader.source(), reader.line());
    }
    records.back().rows.push_back(row);
  }
  return records;
}

std::vector<DatasetRecord> read_dataset_dir(const std::filesystem::path& dir, Label label) {
  const auto prefix = to_string(label) + "_";
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind(prefix, 0) == 0 && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<DatasetRecord> out;
  for (const auto& f : files) {
    auto part = read_dataset_file(f);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

}  // namespace fdi::dataset
