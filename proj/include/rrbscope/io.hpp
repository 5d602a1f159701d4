#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrbscope/common.hpp"
#include "rrbscope/ensemble.hpp"
#include "rrbscope/pipeline.hpp"
#include "rrbscope/sim.hpp"
#include "rrbscope/sniffer.hpp"

namespace rrb::io {

// ---------------------------------------------------------------------------
// Digests and number formatting
// ---------------------------------------------------------------------------

/// 64-bit FNV-1a over a byte sequence.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

/// FNV-1a rendered as 16 lowercase hex digits.
std::string fnv1a64_hex(const std::string& bytes);

/// Digest of a file's raw content.
std::string file_digest(const std::filesystem::path& path);

/// Shortest round-trip decimal form of a double (parsing it back yields the
/// identical bit pattern), so emitted CSVs are byte-stable across runs.
std::string format_double(double value);

// ---------------------------------------------------------------------------
// CSV artifacts
// ---------------------------------------------------------------------------

void write_dci_log_csv(const std::filesystem::path& path, const DciLog& log);
void write_rar_csv(const std::filesystem::path& path, const DciLog& log);

/// Reads a grant CSV and its companion RAR CSV back into a DciLog. The CSV
/// does not carry the run duration, so it is inferred as (last grant's
/// subframe + 1) unless duration_override > 0.
DciLog load_dci_log_csv(const std::filesystem::path& log_path,
                        const std::filesystem::path& rar_path,
                        std::uint32_t duration_override = 0);

void write_trace_csv(const std::filesystem::path& path,
                     const VictimTrace& trace);

/// Reads a trace CSV. The format carries no bin width or C-RNTI; callers
/// that need those must track them out of band (features never do).
VictimTrace load_trace_csv(const std::filesystem::path& path);

/// Per-subframe scheduling truth: `subframe,rnti,direction,arrival_bytes,
/// granted_bytes`, ordered by subframe, then rnti, UL before DL.
void write_ground_truth_csv(const std::filesystem::path& path,
                            const GroundTruth& truth);

void write_features_csv(const std::filesystem::path& path,
                        const std::vector<FeatureVector>& rows);
Dataset load_features_csv(const std::filesystem::path& path);

void write_cdf_csv(const std::filesystem::path& path, const CdfCurve& cdf);

// ---------------------------------------------------------------------------
// JSON artifacts
// ---------------------------------------------------------------------------

/// Simulation scenario document. UE profiles are referenced by class label
/// and resolved against the built-in profile catalog:
///   {"cell": {"total_rbs":100,"rbg_size":4,"tbs_per_rb":100,
///             "subframe_ms":1.0},
///    "duration_subframes": 20000, "seed": 42,
///    "ues": [{"crnti": 4601, "profile": "shop_amazon"}]}
SimConfig load_sim_config(const std::filesystem::path& path);
nlohmann::json sim_config_to_json(const SimConfig& config);

nlohmann::json model_to_json(const ForestModel& model);
ForestModel model_from_json(const nlohmann::json& doc);
void write_model_json(const std::filesystem::path& path,
                      const ForestModel& model);
ForestModel load_model_json(const std::filesystem::path& path);

nlohmann::json metrics_to_json(const MetricsReport& report);
void write_metrics_json(const std::filesystem::path& path,
                        const MetricsReport& report);

/// Human-readable metrics table (per-class rows plus the summary lines).
std::string format_metrics_table(const MetricsReport& report);

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

/// Record of one CLI invocation: what was read, what was written (each with
/// a content digest), which seeds were in play, and how long stages took.
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string command;
  std::map<std::string, std::string> config_paths;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::pair<std::string, std::string>> artifacts;  // path, digest
  std::vector<std::pair<std::string, double>> stage_timings_ms;

  /// Digests the file and appends it to artifacts.
  void add_artifact(const std::filesystem::path& path);
};

nlohmann::json manifest_to_json(const RunManifest& manifest);

}  // namespace rrb::io
