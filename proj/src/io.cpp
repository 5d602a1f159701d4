#include "rrbscope/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rrbscope/profiles.hpp"

namespace rrb::io {

namespace {

std::string path_str(const std::filesystem::path& p) { return p.string(); }

[[noreturn]] void fail_line(const std::filesystem::path& path,
                            std::size_t line_no, const std::string& what) {
  throw data_error(path_str(path) + ":" + std::to_string(line_no) + ": " +
                   what);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot open for writing: " + path_str(path));
  return out;
}

void finish_out(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw data_error("write failed: " + path_str(path));
}

/// Reads all lines, tolerating a trailing CR per line; requires the first
/// line to equal the expected header.
std::vector<std::string> read_csv_lines(const std::filesystem::path& path,
                                        const std::string& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open: " + path_str(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (lines.empty()) throw data_error("empty file: " + path_str(path));
  if (lines[0] != header)
    fail_line(path, 1, "expected header '" + header + "', got '" + lines[0] +
                           "'");
  // Drop one trailing blank line if present (files end with LF).
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::uint64_t parse_u64(const std::string& field,
                        const std::filesystem::path& path,
                        std::size_t line_no) {
  std::uint64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    fail_line(path, line_no, "not an unsigned integer: '" + field + "'");
  return value;
}

double parse_f64(const std::string& field, const std::filesystem::path& path,
                 std::size_t line_no) {
  double value = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    fail_line(path, line_no, "not a number: '" + field + "'");
  return value;
}

Direction parse_direction(const std::string& field,
                          const std::filesystem::path& path,
                          std::size_t line_no) {
  if (field == "UL") return Direction::Uplink;
  if (field == "DL") return Direction::Downlink;
  fail_line(path, line_no, "direction must be UL or DL, got '" + field + "'");
}

/// Formats a throughput bin, which is integral by construction, as a plain
/// integer so byte columns never pick up exponent notation.
std::string format_bin(double value) {
  if (!(value >= 0) || value != std::floor(value) ||
      value > 9.007199254740992e15)
    throw data_error("throughput bin is not a byte count: " +
                     format_double(value));
  return std::to_string(static_cast<std::uint64_t>(value));
}

constexpr const char* kDciHeader = "subframe,rnti,direction,bitmap_hex,tbs_bytes";
constexpr const char* kRarHeader = "subframe,rnti";
constexpr const char* kTraceHeader = "bin_index,ul_bytes,dl_bytes";
constexpr const char* kTruthHeader =
    "subframe,rnti,direction,arrival_bytes,granted_bytes";
constexpr const char* kCdfHeader = "value,probability";
constexpr const char* kModelFormat = "rrbscope-forest";
constexpr int kModelFormatVersion = 1;

}  // namespace

// ---------------------------------------------------------------------------
// Digests and number formatting
// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string fnv1a64_hex(const std::string& bytes) {
  const auto hash = fnv1a64(std::span(
      reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()));
  char buf[17];
  for (int i = 0; i < 16; ++i)
    buf[i] = "0123456789abcdef"[(hash >> (60 - 4 * i)) & 0xf];
  buf[16] = '\0';
  return buf;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open: " + path_str(path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return fnv1a64_hex(buffer.str());
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw data_error("number formatting failed");
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// CSV artifacts
// ---------------------------------------------------------------------------

void write_dci_log_csv(const std::filesystem::path& path, const DciLog& log) {
  auto out = open_out(path);
  out << kDciHeader << '\n';
  for (const DciGrant& g : log.grants)
    out << g.subframe_index << ',' << g.rnti.crnti << ','
        << to_string(g.direction) << ',' << bitmap_to_hex(g.bitmap) << ','
        << g.tbs_bytes << '\n';
  finish_out(out, path);
}

void write_rar_csv(const std::filesystem::path& path, const DciLog& log) {
  auto out = open_out(path);
  out << kRarHeader << '\n';
  for (const RarEvent& e : log.rar_events)
    out << e.subframe << ',' << e.crnti << '\n';
  finish_out(out, path);
}

DciLog load_dci_log_csv(const std::filesystem::path& log_path,
                        const std::filesystem::path& rar_path,
                        std::uint32_t duration_override) {
  DciLog log;

  const auto rar_lines = read_csv_lines(rar_path, kRarHeader);
  for (std::size_t i = 1; i < rar_lines.size(); ++i) {
    const auto fields = split_fields(rar_lines[i]);
    if (fields.size() != 2) fail_line(rar_path, i + 1, "expected 2 fields");
    RarEvent event;
    event.subframe = parse_u64(fields[0], rar_path, i + 1);
    const std::uint64_t rnti = parse_u64(fields[1], rar_path, i + 1);
    if (rnti > 0xffff) fail_line(rar_path, i + 1, "rnti exceeds 16 bits");
    event.crnti = static_cast<std::uint16_t>(rnti);
    log.rar_events.push_back(event);
  }

  const auto lines = read_csv_lines(log_path, kDciHeader);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_fields(lines[i]);
    if (fields.size() != 5) fail_line(log_path, i + 1, "expected 5 fields");
    DciGrant g;
    g.subframe_index = parse_u64(fields[0], log_path, i + 1);
    const std::uint64_t rnti = parse_u64(fields[1], log_path, i + 1);
    if (rnti > 0xffff) fail_line(log_path, i + 1, "rnti exceeds 16 bits");
    g.rnti = UeIdentity{static_cast<std::uint16_t>(rnti)};
    g.direction = parse_direction(fields[2], log_path, i + 1);
    // The wire format does not carry the cell geometry, so the bitmap is
    // decoded at single-RB group granularity; the hex string round-trips.
    try {
      g.bitmap = bitmap_from_hex(fields[3], 1);
    } catch (const data_error& e) {
      fail_line(log_path, i + 1, e.what());
    }
    g.tbs_bytes = parse_u64(fields[4], log_path, i + 1);
    log.grants.push_back(g);
  }

  if (duration_override > 0) {
    log.duration_subframes = duration_override;
  } else {
    for (const DciGrant& g : log.grants)
      log.duration_subframes =
          std::max(log.duration_subframes, g.subframe_index + 1);
    for (const RarEvent& e : log.rar_events)
      log.duration_subframes =
          std::max(log.duration_subframes, e.subframe + 1);
  }
  return log;
}

void write_trace_csv(const std::filesystem::path& path,
                     const VictimTrace& trace) {
  if (trace.ul.values.size() != trace.dl.values.size())
    throw data_error("trace UL/DL series differ in length");
  auto out = open_out(path);
  out << kTraceHeader << '\n';
  for (std::size_t k = 0; k < trace.ul.values.size(); ++k)
    out << k << ',' << format_bin(trace.ul.values[k]) << ','
        << format_bin(trace.dl.values[k]) << '\n';
  finish_out(out, path);
}

VictimTrace load_trace_csv(const std::filesystem::path& path) {
  const auto lines = read_csv_lines(path, kTraceHeader);
  VictimTrace trace;
  trace.bin_subframes = 0;  // not carried by the format
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_fields(lines[i]);
    if (fields.size() != 3) fail_line(path, i + 1, "expected 3 fields");
    const std::uint64_t index = parse_u64(fields[0], path, i + 1);
    if (index != i - 1) fail_line(path, i + 1, "bin_index out of sequence");
    trace.ul.values.push_back(
        static_cast<double>(parse_u64(fields[1], path, i + 1)));
    trace.dl.values.push_back(
        static_cast<double>(parse_u64(fields[2], path, i + 1)));
  }
  return trace;
}

void write_ground_truth_csv(const std::filesystem::path& path,
                            const GroundTruth& truth) {
  std::uint64_t duration = 0;
  for (const UeTruth& ue : truth.ues)
    duration = std::max<std::uint64_t>(duration, ue.ul.granted.size());

  auto out = open_out(path);
  out << kTruthHeader << '\n';
  for (std::uint64_t sf = 0; sf < duration; ++sf)
    for (const UeTruth& ue : truth.ues)
      for (Direction d : {Direction::Uplink, Direction::Downlink}) {
        const DirectionTruth& t = ue.truth(d);
        if (sf >= t.granted.size()) continue;
        out << sf << ',' << ue.crnti << ',' << to_string(d) << ','
            << t.arrivals[sf] << ',' << t.granted[sf] << '\n';
      }
  finish_out(out, path);
}

void write_features_csv(const std::filesystem::path& path,
                        const std::vector<FeatureVector>& rows) {
  auto out = open_out(path);
  out << "label";
  for (const char* name : kFeatureNames) out << ',' << name;
  out << '\n';
  for (const FeatureVector& row : rows) {
    if (!row.class_label || row.class_label->empty())
      throw data_error("feature row without a class label");
    out << *row.class_label;
    for (double v : row.as_array()) out << ',' << format_double(v);
    out << '\n';
  }
  finish_out(out, path);
}

Dataset load_features_csv(const std::filesystem::path& path) {
  std::string header = "label";
  for (const char* name : kFeatureNames) header += std::string(",") + name;

  const auto lines = read_csv_lines(path, header);
  Dataset ds;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_fields(lines[i]);
    if (fields.size() != 1 + kFeatureNames.size())
      fail_line(path, i + 1, "expected 11 fields");
    if (fields[0].empty()) fail_line(path, i + 1, "empty label");
    std::vector<double> row;
    row.reserve(kFeatureNames.size());
    for (std::size_t f = 1; f < fields.size(); ++f)
      row.push_back(parse_f64(fields[f], path, i + 1));
    ds.labels.push_back(fields[0]);
    ds.features.push_back(std::move(row));
  }
  if (ds.features.empty()) throw data_error("no rows in " + path_str(path));
  return ds;
}

void write_cdf_csv(const std::filesystem::path& path, const CdfCurve& cdf) {
  auto out = open_out(path);
  out << kCdfHeader << '\n';
  for (std::size_t i = 0; i < cdf.values.size(); ++i)
    out << format_double(cdf.values[i]) << ','
        << format_double(cdf.probabilities[i]) << '\n';
  finish_out(out, path);
}

// ---------------------------------------------------------------------------
// JSON artifacts
// ---------------------------------------------------------------------------

namespace {

nlohmann::json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open: " + path_str(path));
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(path_str(path) + ": " + e.what());
  }
  return doc;
}

template <typename T>
T get_field(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key))
    throw config_error(std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw config_error(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

SimConfig load_sim_config(const std::filesystem::path& path) {
  const nlohmann::json doc = parse_json_file(path);

  SimConfig config;
  config.duration_subframes = get_field<std::uint64_t>(doc, "duration_subframes");
  config.seed = get_field<std::uint64_t>(doc, "seed");

  const nlohmann::json cell = get_field<nlohmann::json>(doc, "cell");
  config.cell.total_rbs = get_field<std::uint32_t>(cell, "total_rbs");
  config.cell.rbg_size = get_field<std::uint32_t>(cell, "rbg_size");
  config.cell.tbs_per_rb = get_field<bytes_t>(cell, "tbs_per_rb");
  if (cell.contains("subframe_ms"))
    config.cell.subframe_ms = get_field<double>(cell, "subframe_ms");

  const nlohmann::json ues = get_field<nlohmann::json>(doc, "ues");
  if (!ues.is_array()) throw config_error("'ues' must be an array");
  for (const nlohmann::json& entry : ues) {
    SimUe ue;
    const auto crnti = get_field<std::uint32_t>(entry, "crnti");
    if (crnti > 0xffff) throw config_error("crnti exceeds 16 bits");
    ue.identity = UeIdentity{static_cast<std::uint16_t>(crnti)};
    ue.profile = profile_by_label(get_field<std::string>(entry, "profile"),
                                  config.duration_subframes);
    ue.queues[0].qos = ue.profile.qos;
    ue.queues[1].qos = ue.profile.qos;
    config.ues.push_back(std::move(ue));
  }
  return config;
}

nlohmann::json sim_config_to_json(const SimConfig& config) {
  nlohmann::json ues = nlohmann::json::array();
  for (const SimUe& ue : config.ues)
    ues.push_back({{"crnti", ue.identity.crnti},
                   {"profile", ue.profile.class_label}});
  return {{"cell",
           {{"total_rbs", config.cell.total_rbs},
            {"rbg_size", config.cell.rbg_size},
            {"tbs_per_rb", config.cell.tbs_per_rb},
            {"subframe_ms", config.cell.subframe_ms}}},
          {"duration_subframes", config.duration_subframes},
          {"seed", config.seed},
          {"ues", std::move(ues)}};
}

nlohmann::json model_to_json(const ForestModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const DecisionTree& tree : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& node : tree.nodes) {
      if (node.is_leaf()) {
        nodes.push_back({{"histogram", node.counts}});
      } else {
        nodes.push_back({{"feature", node.feature},
                         {"threshold", node.threshold},
                         {"left", node.left},
                         {"right", node.right}});
      }
    }
    trees.push_back(std::move(nodes));
  }

  nlohmann::json doc = {{"format", kModelFormat},
                        {"format_version", kModelFormatVersion},
                        {"variant", to_string(model.config.variant)},
                        {"n_estimators", model.config.n_estimators},
                        {"seed", model.config.seed},
                        {"min_samples_split", model.config.min_samples_split},
                        {"label_dictionary", model.label_dictionary},
                        {"feature_dim", model.feature_dim},
                        {"trees", std::move(trees)}};
  doc["max_depth"] = model.config.max_depth
                         ? nlohmann::json(*model.config.max_depth)
                         : nlohmann::json();
  return doc;
}

ForestModel model_from_json(const nlohmann::json& doc) {
  if (get_field<std::string>(doc, "format") != kModelFormat)
    throw data_error("not a forest model document");
  if (get_field<int>(doc, "format_version") != kModelFormatVersion)
    throw data_error("unsupported model format version");

  ForestModel model;
  model.config.variant =
      forest_variant_from_string(get_field<std::string>(doc, "variant"));
  model.config.n_estimators = get_field<int>(doc, "n_estimators");
  model.config.seed = get_field<std::uint64_t>(doc, "seed");
  model.config.min_samples_split = get_field<int>(doc, "min_samples_split");
  if (doc.contains("max_depth") && !doc.at("max_depth").is_null())
    model.config.max_depth = get_field<int>(doc, "max_depth");
  model.label_dictionary =
      get_field<std::vector<std::string>>(doc, "label_dictionary");
  model.feature_dim = get_field<std::size_t>(doc, "feature_dim");

  const nlohmann::json trees = get_field<nlohmann::json>(doc, "trees");
  if (!trees.is_array()) throw data_error("'trees' must be an array");
  for (const nlohmann::json& tree_doc : trees) {
    DecisionTree tree;
    for (const nlohmann::json& node_doc : tree_doc) {
      TreeNode node;
      if (node_doc.contains("histogram")) {
        node.counts =
            get_field<std::vector<std::uint32_t>>(node_doc, "histogram");
        if (node.counts.size() != model.label_dictionary.size())
          throw data_error("leaf histogram size does not match labels");
      } else {
        node.feature = get_field<std::int32_t>(node_doc, "feature");
        node.threshold = get_field<double>(node_doc, "threshold");
        node.left = get_field<std::int32_t>(node_doc, "left");
        node.right = get_field<std::int32_t>(node_doc, "right");
        if (node.feature < 0 ||
            static_cast<std::size_t>(node.feature) >= model.feature_dim)
          throw data_error("internal node has an out-of-range feature");
      }
      tree.nodes.push_back(std::move(node));
    }
    if (tree.nodes.empty()) throw data_error("tree without nodes");
    for (const TreeNode& node : tree.nodes)
      if (!node.is_leaf() &&
          (node.left < 0 ||
           static_cast<std::size_t>(node.left) >= tree.nodes.size() ||
           node.right < 0 ||
           static_cast<std::size_t>(node.right) >= tree.nodes.size()))
        throw data_error("tree child index out of range");
    model.trees.push_back(std::move(tree));
  }
  if (static_cast<int>(model.trees.size()) != model.config.n_estimators)
    throw data_error("tree count does not match n_estimators");
  return model;
}

void write_model_json(const std::filesystem::path& path,
                      const ForestModel& model) {
  auto out = open_out(path);
  out << model_to_json(model).dump(2) << '\n';
  finish_out(out, path);
}

ForestModel load_model_json(const std::filesystem::path& path) {
  return model_from_json(parse_json_file(path));
}

nlohmann::json metrics_to_json(const MetricsReport& report) {
  nlohmann::json per_class = nlohmann::json::array();
  for (const ClassMetrics& m : report.per_class)
    per_class.push_back({{"label", m.label},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"support", m.support}});
  return {{"accuracy", report.accuracy},
          {"macro_precision", report.macro_precision},
          {"macro_recall", report.macro_recall},
          {"macro_f1", report.macro_f1},
          {"lowest_f1", {{"label", report.lowest_f1_label},
                         {"value", report.lowest_f1}}},
          {"per_class", std::move(per_class)},
          {"labels", report.labels},
          {"confusion_matrix", report.confusion}};
}

void write_metrics_json(const std::filesystem::path& path,
                        const MetricsReport& report) {
  auto out = open_out(path);
  out << metrics_to_json(report).dump(2) << '\n';
  finish_out(out, path);
}

std::string format_metrics_table(const MetricsReport& report) {
  std::ostringstream out;
  std::size_t width = 5;  // "label"
  for (const ClassMetrics& m : report.per_class)
    width = std::max(width, m.label.size());

  const auto pad = [](const std::string& s, std::size_t w) {
    return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
  };
  const auto fixed3 = [](double v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%7.3f", v);
    return std::string(buf);
  };

  out << pad("label", width) << "  precision   recall       f1  support\n";
  for (const ClassMetrics& m : report.per_class) {
    char support[16];
    std::snprintf(support, sizeof(support), "%8llu",
                  static_cast<unsigned long long>(m.support));
    out << pad(m.label, width) << "  " << fixed3(m.precision) << "  "
        << fixed3(m.recall) << "  " << fixed3(m.f1) << " " << support << '\n';
  }
  out << '\n';
  out << "accuracy        " << fixed3(report.accuracy) << '\n';
  out << "macro precision " << fixed3(report.macro_precision) << '\n';
  out << "macro recall    " << fixed3(report.macro_recall) << '\n';
  out << "macro f1        " << fixed3(report.macro_f1) << '\n';
  out << "lowest f1       " << fixed3(report.lowest_f1) << "  ("
      << report.lowest_f1_label << ")\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

void RunManifest::add_artifact(const std::filesystem::path& path) {
  artifacts.emplace_back(path.string(), file_digest(path));
}

nlohmann::json manifest_to_json(const RunManifest& manifest) {
  nlohmann::json artifacts = nlohmann::json::array();
  for (const auto& [path, digest] : manifest.artifacts)
    artifacts.push_back({{"path", path}, {"digest", digest}});
  nlohmann::json timings = nlohmann::json::array();
  for (const auto& [stage, ms] : manifest.stage_timings_ms)
    timings.push_back({{"stage", stage}, {"ms", ms}});
  return {{"tool_version", manifest.tool_version},
          {"command", manifest.command},
          {"config_paths", manifest.config_paths},
          {"seeds", manifest.seeds},
          {"artifacts", std::move(artifacts)},
          {"stage_timings_ms", std::move(timings)}};
}

}  // namespace rrb::io
