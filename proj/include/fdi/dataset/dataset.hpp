#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fdi/dataset/demand.hpp"
#include "fdi/estimation/bad_data.hpp"
#include "fdi/grid/network.hpp"
#include "fdi/powerflow/measurements.hpp"

namespace fdi::dataset {

enum class Label { Normal, Attack };

std::string to_string(Label label);
Label parse_label(const std::string& text);

/// One measurement row of a record: the nine recorded attributes.
struct RecordRow {
  int measurement_id = 0;
  powerflow::MeasurementKind kind = powerflow::MeasurementKind::PFlow;
  int from_bus = 0;
  int to_bus = 0;
  double measured = 0.0;
  double estimated = 0.0;
  double deviation_pct = 0.0;
  bool bdd_flag = false;
  powerflow::Provenance provenance = powerflow::Provenance::Genuine;
};

struct DatasetRecord {
  long record_id = 0;  // 1-based within its label, assigned in timestamp order
  std::int64_t time = 0;
  Label label = Label::Normal;
  std::vector<RecordRow> rows;

  std::size_t manipulated_rows() const;
  std::size_t flagged_rows() const;
  powerflow::MeasurementSet measurements() const;
};

/// 100 (measured - estimated) / max(|estimated|, 1).
double deviation_percent(double measured, double estimated);

struct DatasetConfig {
  std::uint64_t seed = 2018;
  int attacks_per_point = 2;
  int center_bus = 5;
  std::vector<double> deltas_deg{0.5, 1.0, 1.5, 2.0};
  double significance = estimation::kDefaultSignificance;
  double sigma = 1.0;
  powerflow::NoiseModel noise{};
  std::size_t records_per_file = 432;
  unsigned threads = 0;  // 0: hardware concurrency
  std::function<void(const std::string&)> log;  // skip notices; may be empty
};

/// SHA-256 (hex) of the canonical JSON form of the settings that shape the
/// generated values. Threads and the log sink are excluded.
std::string config_digest(const DatasetConfig& config, const std::string& case_name);

/// Sign and size of the k-th attack at a point. Signs alternate +, -, and
/// sizes are drawn from `deltas_deg` by a generator seeded from
/// (seed, point index).
std::vector<double> attack_deltas(const DatasetConfig& config, std::size_t point_index);

/// Builds a record from an estimated set.
DatasetRecord make_record(Label label, std::int64_t time, const powerflow::MeasurementSet& set,
                          const estimation::BddReport& bdd);

struct GenerationStats {
  std::size_t points = 0;
  std::size_t normal = 0;
  std::size_t attack = 0;
  std::size_t skipped_normal = 0;
  std::size_t skipped_attack = 0;
};

using RecordSink = std::function<void(DatasetRecord&&)>;

/// Runs every profile point in parallel blocks and hands records to `sink`
/// in a fixed order: per point, the normal record, then its attack records.
/// Record ids are assigned per label in that order. Failed points are
/// logged, counted and skipped.
GenerationStats generate_dataset(const DemandProfile& profile, const grid::NetworkModel& network,
                                 const DatasetConfig& config, const RecordSink& sink, bool normal = true,
                                 bool attack = true);

std::vector<DatasetRecord> generate_normal_records(const DemandProfile& profile, const grid::NetworkModel& network,
                                                   const DatasetConfig& config);
std::vector<DatasetRecord> generate_attack_records(const DemandProfile& profile, const grid::NetworkModel& network,
                                                   const DatasetConfig& config);

struct DatasetManifest {
  std::size_t normal_records = 0;
  std::size_t attack_records = 0;
  std::size_t total_records = 0;
  int attributes_per_row = 9;
  std::size_t measurements_per_record = 0;
  std::size_t records_per_file = 432;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::string content_digest;  // SHA-256 over the written CSV bytes
  std::size_t skipped_normal = 0;
  std::size_t skipped_attack = 0;
  std::vector<std::string> files;
};

std::string to_json(const DatasetManifest& manifest);

namespace detail {
class Sha256;
}

/// Streams records into `normal_NNNN.csv` / `attack_NNNN.csv` partitions of
/// at most `records_per_file` records each. finish() writes manifest.json and
/// SCHEMA.md.
class DatasetWriter {
 public:
  DatasetWriter(std::filesystem::path out_dir, std::size_t records_per_file);
  ~DatasetWriter();
  DatasetWriter(const DatasetWriter&) = delete;
  DatasetWriter& operator=(const DatasetWriter&) = delete;

  void add(const DatasetRecord& record);
  DatasetManifest finish(std::uint64_t seed, const std::string& config_digest, const GenerationStats& stats);

 private:
  struct Partition;
  void write(Partition& part, const DatasetRecord& record);

  std::filesystem::path out_dir_;
  std::size_t records_per_file_;
  std::unique_ptr<Partition> normal_;
  std::unique_ptr<Partition> attack_;
  std::size_t measurements_per_record_ = 0;
  std::vector<std::string> files_;
  std::unique_ptr<detail::Sha256> hasher_;
};

DatasetManifest write_dataset(const std::vector<DatasetRecord>& records, const std::filesystem::path& out_dir,
                              std::size_t records_per_file, std::uint64_t seed = 0,
                              const std::string& config_digest = {}, const GenerationStats& stats = {});

inline constexpr const char* kRecordHeader =
    "record_id,timestamp,label,measurement_id,kind,from_bus,to_bus,measured,estimated,deviation_pct,bdd_flag,"
    "provenance";

/// Reads one partition file back into records.
std::vector<DatasetRecord> read_dataset_file(const std::filesystem::path& path);

/// Reads every `normal_*.csv` and `attack_*.csv` under `dir`, in file order.
std::vector<DatasetRecord> read_dataset_dir(const std::filesystem::path& dir, Label label);

std::string sha256_hex(const std::string& bytes);

}  // namespace fdi::dataset
