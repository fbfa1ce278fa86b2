#include "modeconn/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace modeconn {

namespace fs = std::filesystem;

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t hash_file(const fs::path& path) {
  std::string content = read_text_file(path);
  return fnv1a64(content.data(), content.size());
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot open " + path.string() + " for writing");
  out << content;
  if (!out) fail(Errc::io_error, "write failed for " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- graph directory ---------------------------------------------------

static std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

static std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find('\t', start);
    if (end == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return fields;
}

static long parse_int(const std::string& s, const std::string& file, long line_no) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (...) {
    fail_at(Errc::parse_error, file + ": bad integer '" + s + "' at line " +
                                   std::to_string(line_no), line_no);
  }
  if (pos != s.size())
    fail_at(Errc::parse_error, file + ": trailing characters at line " +
                                   std::to_string(line_no), line_no);
  return v;
}

static double parse_real(const std::string& s, const std::string& file, long line_no) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (...) {
    fail_at(Errc::parse_error, file + ": bad real '" + s + "' at line " +
                                   std::to_string(line_no), line_no);
  }
  if (pos != s.size())
    fail_at(Errc::parse_error, file + ": trailing characters at line " +
                                   std::to_string(line_no), line_no);
  return v;
}

void save_graph(const fs::path& dir, const GraphDataset& g) {
  g.validate();
  fs::create_directories(dir);
  std::ostringstream edges;
  for (const auto& [u, v] : g.edges) edges << u << '\t' << v << '\n';
  write_text_file(dir / "edges.tsv", edges.str());

  std::ostringstream feats;
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.d(); ++j) {
      if (j) feats << '\t';
      feats << format_g17(g.X(i, j));
    }
    feats << '\n';
  }
  write_text_file(dir / "features.tsv", feats.str());

  std::ostringstream labels;
  for (int i = 0; i < g.n; ++i) labels << g.Y[i] << '\n';
  write_text_file(dir / "labels.tsv", labels.str());

  std::ostringstream masks;
  for (int i = 0; i < g.n; ++i)
    masks << (g.train_mask[i] ? "train" : g.test_mask[i] ? "test" : "none") << '\n';
  write_text_file(dir / "masks.tsv", masks.str());
}

GraphDataset load_graph(const fs::path& dir) {
  GraphDataset g;

  auto label_lines = split_lines(read_text_file(dir / "labels.tsv"));
  g.n = static_cast<int>(label_lines.size());
  if (g.n == 0) fail(Errc::parse_error, "labels.tsv is empty");
  g.Y.resize(g.n);
  int max_label = 0;
  for (int i = 0; i < g.n; ++i) {
    long y = parse_int(label_lines[i], "labels.tsv", i + 1);
    if (y < 0)
      fail_at(Errc::parse_error, "labels.tsv: negative label at line " +
                                     std::to_string(i + 1), i + 1);
    g.Y[i] = static_cast<int>(y);
    max_label = std::max(max_label, g.Y[i]);
  }
  g.C = max_label + 1;
  if (g.C < 2) fail(Errc::parse_error, "labels.tsv: need at least two classes");

  auto feat_lines = split_lines(read_text_file(dir / "features.tsv"));
  if (static_cast<int>(feat_lines.size()) != g.n)
    fail(Errc::parse_error, "features.tsv row count != node count");
  auto first = split_tabs(feat_lines[0]);
  int d = static_cast<int>(first.size());
  g.X.resize(g.n, d);
  for (int i = 0; i < g.n; ++i) {
    auto fields = split_tabs(feat_lines[i]);
    if (static_cast<int>(fields.size()) != d)
      fail_at(Errc::parse_error, "features.tsv: ragged row at line " +
                                     std::to_string(i + 1), i + 1);
    for (int j = 0; j < d; ++j)
      g.X(i, j) = parse_real(fields[j], "features.tsv", i + 1);
  }

  auto mask_lines = split_lines(read_text_file(dir / "masks.tsv"));
  if (static_cast<int>(mask_lines.size()) != g.n)
    fail(Errc::parse_error, "masks.tsv row count != node count");
  g.train_mask.assign(g.n, 0);
  g.test_mask.assign(g.n, 0);
  for (int i = 0; i < g.n; ++i) {
    const std::string& m = mask_lines[i];
    if (m == "train")
      g.train_mask[i] = 1;
    else if (m == "test")
      g.test_mask[i] = 1;
    else if (m != "none")
      fail_at(Errc::parse_error, "masks.tsv: expected train|test|none at line " +
                                     std::to_string(i + 1), i + 1);
  }

  auto edge_lines = split_lines(read_text_file(dir / "edges.tsv"));
  std::set<Edge> seen;
  for (std::size_t ln = 0; ln < edge_lines.size(); ++ln) {
    auto fields = split_tabs(edge_lines[ln]);
    if (fields.size() != 2)
      fail_at(Errc::parse_error, "edges.tsv: expected two columns at line " +
                                     std::to_string(ln + 1),
              static_cast<long>(ln + 1));
    long u = parse_int(fields[0], "edges.tsv", static_cast<long>(ln + 1));
    long v = parse_int(fields[1], "edges.tsv", static_cast<long>(ln + 1));
    if (u < 0 || v < 0 || u >= g.n || v >= g.n)
      fail_at(Errc::parse_error, "edges.tsv: endpoint out of range at line " +
                                     std::to_string(ln + 1),
              static_cast<long>(ln + 1));
    if (u == v) continue;  // self-loops are dropped on load
    Edge key = u < v ? Edge{static_cast<int>(u), static_cast<int>(v)}
                     : Edge{static_cast<int>(v), static_cast<int>(u)};
    if (seen.insert(key).second) g.edges.push_back(key);
  }

  g.validate();
  return g;
}

// ---- checkpoints ------------------------------------------------------

static constexpr char kMagic[8] = {'M', 'C', 'N', 'N', '0', '0', '0', '1'};

template <typename T>
static void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
static T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size())
    fail(Errc::corrupt_checkpoint, "checkpoint truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

void save_mode(const fs::path& path, const Mode& mode) {
  mode.params.validate();
  std::string payload;
  for (const auto& W : mode.params.weights) {
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j) put(payload, W(i, j));
  }

  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put(out, static_cast<std::uint32_t>(mode.params.arch));
  put(out, static_cast<std::uint32_t>(mode.params.activation.kind));
  put(out, mode.params.activation.alpha);
  put(out, static_cast<std::uint32_t>(mode.params.layer_dims.size()));
  for (int dim : mode.params.layer_dims) put(out, static_cast<std::uint32_t>(dim));
  out += payload;
  put(out, fnv1a64(payload.data(), payload.size()));
  write_text_file(path, out);

  write_text_file(fs::path(path).concat(".json"), mode_metrics_json(mode));
}

Mode load_mode(const fs::path& path) {
  std::string in = read_text_file(path);
  if (in.size() < sizeof(kMagic) || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0)
    fail(Errc::corrupt_checkpoint, "bad checkpoint magic in " + path.string());
  std::size_t pos = sizeof(kMagic);

  Mode mode;
  auto arch = take<std::uint32_t>(in, pos);
  if (arch > 2) fail(Errc::corrupt_checkpoint, "unknown architecture code");
  mode.params.arch = static_cast<Arch>(arch);
  auto act = take<std::uint32_t>(in, pos);
  if (act > 2) fail(Errc::corrupt_checkpoint, "unknown activation code");
  mode.params.activation.kind = static_cast<Activation::Kind>(act);
  mode.params.activation.alpha = take<double>(in, pos);
  auto dim_count = take<std::uint32_t>(in, pos);
  if (dim_count < 2 || dim_count > 64)
    fail(Errc::corrupt_checkpoint, "implausible layer count");
  for (std::uint32_t i = 0; i < dim_count; ++i) {
    auto dim = take<std::uint32_t>(in, pos);
    if (dim == 0) fail(Errc::corrupt_checkpoint, "zero layer dimension");
    mode.params.layer_dims.push_back(static_cast<int>(dim));
  }

  std::size_t payload_start = pos;
  for (std::size_t l = 0; l + 1 < mode.params.layer_dims.size(); ++l) {
    Matrix W(mode.params.layer_dims[l], mode.params.layer_dims[l + 1]);
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = take<double>(in, pos);
    mode.params.weights.push_back(std::move(W));
  }
  std::uint64_t stored = take<std::uint64_t>(in, pos);
  std::uint64_t actual = fnv1a64(in.data() + payload_start, pos - 8 - payload_start);
  if (stored != actual)
    fail(Errc::corrupt_checkpoint, "payload hash mismatch in " + path.string());
  if (pos != in.size())
    fail(Errc::corrupt_checkpoint, "trailing bytes in " + path.string());
  mode.params.validate();

  // Sidecar is optional on load; metrics stay zeroed without it.
  fs::path sidecar = fs::path(path).concat(".json");
  if (fs::exists(sidecar)) {
    std::string json = read_text_file(sidecar);
    auto grab = [&json](const char* key) {
      std::string pat = std::string("\"") + key + "\": ";
      auto p = json.find(pat);
      return p == std::string::npos ? 0.0 : std::stod(json.substr(p + pat.size()));
    };
    mode.metrics.train_loss = grab("train_loss");
    mode.metrics.test_loss = grab("test_loss");
    mode.metrics.train_acc = grab("train_acc");
    mode.metrics.test_acc = grab("test_acc");
    mode.metrics.generalization_gap = grab("generalization_gap");
    mode.provenance.epochs_run = static_cast<int>(grab("epochs_run"));
    mode.provenance.seed = static_cast<std::uint64_t>(grab("seed"));
  }
  return mode;
}

// ---- CSV ---------------------------------------------------------------

static const char* kUnitsComment = "# units: loss=nats, accuracy=fraction in [0,1]\n";

std::string profile_csv(const PathProfile& profile) {
  std::ostringstream out;
  out << kUnitsComment;
  out << "alpha,train_loss,test_loss,train_acc,test_acc\n";
  for (std::size_t i = 0; i < profile.alphas.size(); ++i) {
    out << format_g17(profile.alphas[i]) << ',' << format_g17(profile.train_loss[i])
        << ',' << format_g17(profile.test_loss[i]) << ','
        << format_g17(profile.train_acc[i]) << ',' << format_g17(profile.test_acc[i])
        << '\n';
  }
  return out.str();
}

std::string landscape_csv(const LandscapeGrid& grid) {
  std::ostringstream out;
  out << kUnitsComment;
  out << "x,y,train_loss\n";
  for (std::size_t i = 0; i < grid.ys.size(); ++i)
    for (std::size_t j = 0; j < grid.xs.size(); ++j)
      out << format_g17(grid.xs[j]) << ',' << format_g17(grid.ys[i]) << ','
          << format_g17(grid.loss(static_cast<Eigen::Index>(i),
                                  static_cast<Eigen::Index>(j)))
          << '\n';
  return out.str();
}

static std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(',', start);
    if (end == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return fields;
}

PathProfile parse_profile_csv(const std::string& text) {
  PathProfile prof;
  long line_no = 0;
  bool saw_header = false;
  for (const auto& line : split_lines(text)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      saw_header = true;  // column order is fixed by profile_csv
      continue;
    }
    auto fields = split_commas(line);
    if (fields.size() != 5)
      fail_at(Errc::parse_error, "profile csv: expected 5 columns at line " +
                                     std::to_string(line_no), line_no);
    prof.alphas.push_back(parse_real(fields[0], "profile csv", line_no));
    prof.train_loss.push_back(parse_real(fields[1], "profile csv", line_no));
    prof.test_loss.push_back(parse_real(fields[2], "profile csv", line_no));
    prof.train_acc.push_back(parse_real(fields[3], "profile csv", line_no));
    prof.test_acc.push_back(parse_real(fields[4], "profile csv", line_no));
  }
  if (prof.alphas.empty()) fail(Errc::parse_error, "profile csv has no data rows");
  return prof;
}

std::string scatter_csv(const std::vector<double>& xs, const std::vector<double>& ys,
                        const std::string& label) {
  std::ostringstream out;
  out << kUnitsComment;
  out << "x,y,label\n";
  for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i)
    out << format_g17(xs[i]) << ',' << format_g17(ys[i]) << ',' << label << '\n';
  return out.str();
}

std::vector<std::map<std::string, std::string>> read_csv_rows(
    const fs::path& path) {
  std::vector<std::map<std::string, std::string>> rows;
  std::vector<std::string> header;
  long line_no = 0;
  for (const auto& line : split_lines(read_text_file(path))) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_commas(line);
    if (header.empty()) {
      header = fields;
      continue;
    }
    if (fields.size() != header.size())
      fail_at(Errc::parse_error, path.string() + ": ragged row at line " +
                                     std::to_string(line_no), line_no);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = fields[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---- JSON --------------------------------------------------------------

void JsonWriter::comma() {
  if (!need_comma_.empty()) {
    if (need_comma_.back()) out_ += ", ";
    need_comma_.back() = true;
  }
}

JsonWriter& JsonWriter::begin_object() {
  comma();
  out_ += '{';
  need_comma_.push_back(false);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  out_ += '}';
  need_comma_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::begin_array(const std::string& key) {
  comma();
  out_ += '"' + key + "\": [";
  need_comma_.push_back(false);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  out_ += ']';
  need_comma_.pop_back();
  return *this;
}

// Non-finite values have no JSON literal; emit null.
static std::string json_number(double v) {
  return std::isfinite(v) ? format_g17(v) : std::string("null");
}

JsonWriter& JsonWriter::field(const std::string& key, double value) {
  comma();
  out_ += '"' + key + "\": " + json_number(value);
  return *this;
}

JsonWriter& JsonWriter::field(const std::string& key, std::int64_t value) {
  comma();
  out_ += '"' + key + "\": " + std::to_string(value);
  return *this;
}

JsonWriter& JsonWriter::field(const std::string& key, const std::string& value) {
  comma();
  out_ += '"' + key + "\": \"" + value + '"';
  return *this;
}

JsonWriter& JsonWriter::field(const std::string& key, bool value) {
  comma();
  out_ += '"' + key + "\": " + (value ? "true" : "false");
  return *this;
}

JsonWriter& JsonWriter::element(double value) {
  comma();
  out_ += json_number(value);
  return *this;
}

std::string bound_report_json(const BoundReport& rep) {
  JsonWriter w;
  w.begin_object();
  w.field("layerwise_barrier_bound", rep.layerwise);
  w.field("graph_property_bound", rep.graph_property);
  w.field("csbm_bound_raw", rep.csbm_raw);
  w.field("csbm_bound", rep.csbm_clamped);
  w.field("lower_bound", rep.lower_bound);
  w.field("gen_bound", rep.gen_bound);
  std::string echo = "\"inputs_echo\": {";
  bool first = true;
  for (const auto& [k, v] : rep.inputs_echo) {
    if (!first) echo += ", ";
    echo += '"' + k + "\": " + json_number(v);
    first = false;
  }
  echo += '}';
  std::string body = w.str();  // unterminated: still inside the object
  return body + ", " + echo + "}\n";
}

std::string barrier_report_json(const BarrierReport& train_rep,
                                const BarrierReport& test_rep) {
  JsonWriter w;
  w.begin_object();
  auto emit = [&w](const char* prefix, const BarrierReport& r) {
    w.field(std::string(prefix) + "_loss_barrier", r.loss_barrier);
    w.field(std::string(prefix) + "_acc_barrier", r.acc_barrier);
    w.field(std::string(prefix) + "_argmax_alpha", r.argmax_alpha);
  };
  emit("train", train_rep);
  emit("test", test_rep);
  w.begin_array("train_deviation");
  for (double d : train_rep.deviation) w.element(d);
  w.end_array();
  w.begin_array("test_deviation");
  for (double d : test_rep.deviation) w.element(d);
  w.end_array();
  w.end_object();
  return w.str() + "\n";
}

std::string correlation_report_json(const CorrelationReport& rep) {
  JsonWriter w;
  w.begin_object();
  w.field("pearson", rep.pearson);
  w.field("spearman", rep.spearman);
  w.field("r_squared", rep.r_squared);
  w.field("sample_count", static_cast<std::int64_t>(rep.sample_count));
  w.end_object();
  return w.str() + "\n";
}

std::string domain_pair_json(const DomainPairReport& rep) {
  JsonWriter w;
  w.begin_object();
  w.field("d_mc", rep.d_mc);
  w.field("delta_da", rep.delta_da);
  w.field("source_loss", rep.source_loss);
  w.field("target_loss", rep.target_loss);
  w.end_object();
  return w.str() + "\n";
}

std::string mode_metrics_json(const Mode& mode) {
  const TrainConfig& cfg = mode.provenance.config;
  JsonWriter w;
  w.begin_object();
  w.field("train_loss", mode.metrics.train_loss);
  w.field("test_loss", mode.metrics.test_loss);
  w.field("train_acc", mode.metrics.train_acc);
  w.field("test_acc", mode.metrics.test_acc);
  w.field("generalization_gap", mode.metrics.generalization_gap);
  w.field("graph_id", mode.provenance.graph_id);
  w.field("epochs_run", static_cast<std::int64_t>(mode.provenance.epochs_run));
  w.field("seed", static_cast<std::int64_t>(mode.provenance.seed));
  w.field("arch", to_string(mode.params.arch));
  w.field("activation", to_string(mode.params.activation));
  w.field("lr", cfg.lr);
  w.field("optimizer", to_string(cfg.optimizer));
  w.field("weight_decay", cfg.weight_decay);
  w.field("dropout", cfg.dropout);
  w.field("minibatch_fraction", cfg.minibatch_fraction);
  w.field("data_order_seed", static_cast<std::int64_t>(cfg.data_order_seed));
  w.field("init", cfg.init.kind == InitSpec::Kind::glorot ? "glorot" : "uniform");
  w.field("init_seed", static_cast<std::int64_t>(cfg.init.seed));
  std::string hidden;
  for (std::size_t i = 0; i < cfg.hidden_dims.size(); ++i)
    hidden += (i ? "," : "") + std::to_string(cfg.hidden_dims[i]);
  w.field("hidden", hidden);
  w.end_object();
  return w.str() + "\n";
}

std::string RunManifest::to_json() const {
  JsonWriter w;
  w.begin_object();
  w.field("run_id", run_id);
  w.field("wall_ms", wall_ms);
  w.end_object();
  std::string head = w.str();
  head.pop_back();

  std::string body = head;
  body += ", \"input_hashes\": {";
  bool first = true;
  for (const auto& [k, v] : input_hashes) {
    if (!first) body += ", ";
    body += '"' + k + "\": \"" + v + '"';
    first = false;
  }
  body += "}, \"outputs\": [";
  first = true;
  for (const auto& o : outputs) {
    if (!first) body += ", ";
    body += '"' + o + '"';
    first = false;
  }
  body += "], \"per_seed_status\": {";
  first = true;
  for (const auto& [k, v] : per_seed_status) {
    if (!first) body += ", ";
    body += '"' + k + "\": \"" + v + '"';
    first = false;
  }
  body += "}, \"resolved_config\": " + resolved_config + "}\n";
  return body;
}

}  // namespace modeconn
