#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "modeconn/engine.hpp"
#include "modeconn/path.hpp"
#include "modeconn/spectral.hpp"
#include "modeconn/stats.hpp"

namespace modeconn {

/// Shortest 17-significant-digit decimal form; round-trips doubles
/// bit-exactly.
std::string format_g17(double v);

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t hash_file(const std::filesystem::path& path);

// ---- graph directory format -------------------------------------------
// edges.tsv     two integer columns (directed input is symmetrized and
//               deduplicated; self-loops are dropped)
// features.tsv  n rows x d tab-separated reals
// labels.tsv    n integers in {0..C-1}
// masks.tsv     n rows, each one of: train | test | none

void save_graph(const std::filesystem::path& dir, const GraphDataset& g);
GraphDataset load_graph(const std::filesystem::path& dir);

// ---- checkpoint format --------------------------------------------------
// Binary, little-endian: magic "MCNN0001", u32 arch, u32 activation kind,
// f64 activation alpha, u32 dim count, u32 dims..., then per layer the
// row-major f64 payload, then a u64 FNV-1a hash of the payload bytes.
// A JSON sidecar (<path>.json) carries metrics and provenance.

void save_mode(const std::filesystem::path& path, const Mode& mode);
Mode load_mode(const std::filesystem::path& path);

// ---- CSV emission --------------------------------------------------------
// Every CSV starts with a units comment line; losses are in nats,
// accuracies are fractions in [0,1]. Numbers use 17 significant digits.

std::string profile_csv(const PathProfile& profile);
std::string landscape_csv(const LandscapeGrid& grid);

PathProfile parse_profile_csv(const std::string& text);

/// Scatter points for correlation plots (columns: x, y, label).
std::string scatter_csv(const std::vector<double>& xs, const std::vector<double>& ys,
                        const std::string& label);

/// Header-keyed rows of a CSV file; leading '#' lines are skipped.
std::vector<std::map<std::string, std::string>> read_csv_rows(
    const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

// ---- JSON emission ---------------------------------------------------

/// Minimal ordered JSON writer; doubles go through format_g17.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array(const std::string& key);
  JsonWriter& end_array();
  JsonWriter& field(const std::string& key, double value);
  JsonWriter& field(const std::string& key, std::int64_t value);
  JsonWriter& field(const std::string& key, const std::string& value);
  JsonWriter& field(const std::string& key, const char* value) {
    return field(key, std::string(value));
  }
  JsonWriter& field(const std::string& key, bool value);
  JsonWriter& element(double value);
  std::string str() const { return out_; }

 private:
  void comma();
  std::string out_;
  std::vector<bool> need_comma_;
};

std::string bound_report_json(const BoundReport& rep);
std::string barrier_report_json(const BarrierReport& train_rep,
                                const BarrierReport& test_rep);
std::string correlation_report_json(const CorrelationReport& rep);
std::string domain_pair_json(const DomainPairReport& rep);
std::string mode_metrics_json(const Mode& mode);

// ---- run manifest -----------------------------------------------------

struct RunManifest {
  std::string run_id;  // hex FNV of the resolved config
  std::string resolved_config;
  std::map<std::string, std::string> input_hashes;
  std::vector<std::string> outputs;
  double wall_ms = 0.0;
  std::map<std::string, std::string> per_seed_status;

  std::string to_json() const;
};

}  // namespace modeconn
