#include <doctest.h>

#include <unistd.h>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrbscope/ensemble.hpp"
#include "rrbscope/io.hpp"
#include "rrbscope/profiles.hpp"
#include "rrbscope/rng.hpp"
#include "rrbscope/sim.hpp"
#include "rrbscope/sniffer.hpp"

using namespace rrb;
namespace fs = std::filesystem;

namespace {

// Fresh per-test scratch directory, removed on destruction.
struct TempDir {
  fs::path path;

  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("rrbscope_test_" + tag + "_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

DciLog small_log() {
  DciLog log;
  log.rar_events = {{0, 17}, {2, 42}};
  log.duration_subframes = 6;
  const CellConfig cell;
  for (std::uint64_t sf = 0; sf < 6; ++sf) {
    DciGrant g;
    g.subframe_index = sf;
    g.rnti.crnti = sf % 2 ? 42 : 17;
    g.direction = sf % 3 ? Direction::Downlink : Direction::Uplink;
    g.bitmap = make_contiguous_bitmap(cell, 0, 1 + sf % 3);
    g.tbs_bytes = grant_bytes(g.bitmap, cell);
    log.grants.push_back(std::move(g));
  }
  return log;
}

}  // namespace

TEST_CASE("FNV-1a matches the published reference vectors") {
  CHECK(io::fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(io::fnv1a64_hex("a") == "af63dc4c8601ec8c");
  CHECK(io::fnv1a64_hex("foobar") == "85944171f73967e8");
  // Always 16 lowercase hex digits, zero-padded.
  CHECK(io::fnv1a64_hex("subframe,rnti\n").size() == 16);
}

TEST_CASE("file digests depend only on byte content") {
  TempDir dir("digest");
  spit(dir.path / "a.txt", "hello\n");
  spit(dir.path / "b.txt", "hello\n");
  spit(dir.path / "c.txt", "hello!");
  CHECK(io::file_digest(dir.path / "a.txt") ==
        io::file_digest(dir.path / "b.txt"));
  CHECK(io::file_digest(dir.path / "a.txt") !=
        io::file_digest(dir.path / "c.txt"));
  CHECK(io::file_digest(dir.path / "a.txt") == io::fnv1a64_hex("hello\n"));
  CHECK_THROWS_AS(io::file_digest(dir.path / "missing.txt"), data_error);
}

TEST_CASE("doubles print in their shortest round-trip form") {
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::format_double(1.0) == "1");
  CHECK(io::format_double(80.8) == "80.8");
  CHECK(io::format_double(-3.25) == "-3.25");
  CHECK(io::format_double(0.0) == "0");

  SplitMix64 rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const double value = (rng.next_double() - 0.5) * 1e9;
    const std::string text = io::format_double(value);
    double parsed = 0;
    const auto [ptr, ec] =
        std::from_chars(text.data(), text.data() + text.size(), parsed);
    REQUIRE(ec == std::errc{});
    CHECK(ptr == text.data() + text.size());
    CHECK(parsed == value);
  }
}

TEST_CASE("grant and RAR logs round-trip through their CSV form") {
  TempDir dir("dci");
  const DciLog log = small_log();
  const fs::path log_path = dir.path / "dci_log.csv";
  const fs::path rar_path = dir.path / "rar_events.csv";
  io::write_dci_log_csv(log_path, log);
  io::write_rar_csv(rar_path, log);

  const std::string text = slurp(log_path);
  CHECK(text.rfind("subframe,rnti,direction,bitmap_hex,tbs_bytes\n", 0) == 0);
  CHECK(slurp(rar_path).rfind("subframe,rnti\n", 0) == 0);

  const DciLog back = io::load_dci_log_csv(log_path, rar_path);
  CHECK(back.rar_events == log.rar_events);
  REQUIRE(back.grants.size() == log.grants.size());
  for (std::size_t i = 0; i < log.grants.size(); ++i) {
    CHECK(back.grants[i].subframe_index == log.grants[i].subframe_index);
    CHECK(back.grants[i].rnti == log.grants[i].rnti);
    CHECK(back.grants[i].direction == log.grants[i].direction);
    CHECK(back.grants[i].tbs_bytes == log.grants[i].tbs_bytes);
    // The CSV stores the bitmap as hex; the allocation it denotes (and
    // hence its re-encoding) survives the trip.
    CHECK(bitmap_to_hex(back.grants[i].bitmap) ==
          bitmap_to_hex(log.grants[i].bitmap));
  }
  // Duration is inferred from the last event when not overridden.
  CHECK(back.duration_subframes == 6);
  CHECK(io::load_dci_log_csv(log_path, rar_path, 50).duration_subframes ==
        50);
}

TEST_CASE("malformed grant CSVs are rejected with the offending line") {
  TempDir dir("dci_bad");
  const fs::path rar_path = dir.path / "rar.csv";
  spit(rar_path, "subframe,rnti\n0,17\n");

  const fs::path wrong_header = dir.path / "wrong_header.csv";
  spit(wrong_header, "subframe,rnti,direction,bitmap,tbs_bytes\n");
  CHECK_THROWS_AS(io::load_dci_log_csv(wrong_header, rar_path), data_error);

  const fs::path bad_direction = dir.path / "bad_direction.csv";
  spit(bad_direction,
       "subframe,rnti,direction,bitmap_hex,tbs_bytes\n0,17,XX,01,400\n");
  CHECK_THROWS_AS(io::load_dci_log_csv(bad_direction, rar_path), data_error);

  const fs::path bad_number = dir.path / "bad_number.csv";
  spit(bad_number,
       "subframe,rnti,direction,bitmap_hex,tbs_bytes\n0,17,UL,01,4x0\n");
  CHECK_THROWS_AS(io::load_dci_log_csv(bad_number, rar_path), data_error);

  const fs::path short_row = dir.path / "short_row.csv";
  spit(short_row, "subframe,rnti,direction,bitmap_hex,tbs_bytes\n0,17,UL\n");
  try {
    io::load_dci_log_csv(short_row, rar_path);
    FAIL("expected a data error");
  } catch (const data_error& e) {
    // The message points at the file line so bad logs are debuggable.
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }

  CHECK_THROWS_AS(io::load_dci_log_csv(dir.path / "none.csv", rar_path),
                  data_error);
}

TEST_CASE("throughput traces round-trip through their CSV form") {
  TempDir dir("trace");
  VictimTrace trace;
  trace.crnti.crnti = 7;
  trace.bin_subframes = 100;
  trace.ul.bin_width_ms = 100.0;
  trace.ul.values = {0.0, 40000.0, 1200.0};
  trace.dl.bin_width_ms = 100.0;
  trace.dl.values = {123400.0, 0.0, 98700.0};

  const fs::path path = dir.path / "trace.csv";
  io::write_trace_csv(path, trace);
  const std::string text = slurp(path);
  CHECK(text ==
        "bin_index,ul_bytes,dl_bytes\n"
        "0,0,123400\n"
        "1,40000,0\n"
        "2,1200,98700\n");

  const VictimTrace back = io::load_trace_csv(path);
  CHECK(back.ul.values == trace.ul.values);
  CHECK(back.dl.values == trace.dl.values);

  const fs::path gap = dir.path / "gap.csv";
  spit(gap, "bin_index,ul_bytes,dl_bytes\n0,1,1\n2,1,1\n");
  CHECK_THROWS_AS(io::load_trace_csv(gap), data_error);
  // A header-only file is a structurally valid trace with zero bins.
  const fs::path empty = dir.path / "empty.csv";
  spit(empty, "bin_index,ul_bytes,dl_bytes\n");
  CHECK(io::load_trace_csv(empty).ul.values.empty());
}

TEST_CASE("ground truth CSV lists both directions per subframe") {
  TempDir dir("truth");
  SimConfig cfg;
  cfg.duration_subframes = 3;
  cfg.seed = 4;
  SimUe ue;
  ue.identity.crnti = 9;
  ue.profile = profile_by_label("conf_whatsapp_voice", 3);
  cfg.ues.push_back(ue);
  const auto [log, truth] = run_simulation(cfg);

  const fs::path path = dir.path / "ground_truth.csv";
  io::write_ground_truth_csv(path, truth);
  const std::string text = slurp(path);
  CHECK(text.rfind("subframe,rnti,direction,arrival_bytes,granted_bytes\n",
                   0) == 0);
  // Header + 3 subframes x 1 UE x 2 directions.
  CHECK(std::count(text.begin(), text.end(), '\n') == 7);
  CHECK(text.find(",UL,") != std::string::npos);
  CHECK(text.find(",DL,") != std::string::npos);
}

TEST_CASE("feature tables round-trip into training datasets") {
  TempDir dir("features");
  std::vector<FeatureVector> rows(2);
  rows[0].class_label = "shop_amazon";
  rows[0].ul_mean = 1.5;
  rows[0].ul_std = 0.25;
  rows[0].ul_slope = -2.0;
  rows[0].ul_q1 = 1.0;
  rows[0].ul_q3 = 2.0;
  rows[0].dl_mean = 80.8;
  rows[0].dl_q3 = 90.0;
  rows[1].class_label = "yt_vod_hd";
  rows[1].dl_mean = 123456.75;

  const fs::path path = dir.path / "features.csv";
  io::write_features_csv(path, rows);
  const std::string text = slurp(path);
  CHECK(text.rfind("label,ul_mean,ul_std,ul_slope,ul_q1,ul_q3,"
                   "dl_mean,dl_std,dl_slope,dl_q1,dl_q3\n",
                   0) == 0);

  const Dataset ds = io::load_features_csv(path);
  REQUIRE(ds.size() == 2);
  CHECK(ds.dim() == 10);
  CHECK(ds.labels[0] == "shop_amazon");
  CHECK(ds.labels[1] == "yt_vod_hd");
  CHECK(ds.features[0][0] == 1.5);
  CHECK(ds.features[0][2] == -2.0);
  CHECK(ds.features[0][5] == 80.8);
  CHECK(ds.features[1][5] == 123456.75);

  // A row missing its label is unusable for training.
  const fs::path unlabeled = dir.path / "unlabeled.csv";
  spit(unlabeled,
       "label,ul_mean,ul_std,ul_slope,ul_q1,ul_q3,"
       "dl_mean,dl_std,dl_slope,dl_q1,dl_q3\n,1,2,3,4,5,6,7,8,9,10\n");
  CHECK_THROWS_AS(io::load_features_csv(unlabeled), data_error);
}

TEST_CASE("a feature row missing from the dataset is never invented") {
  TempDir dir("features_empty");
  const fs::path path = dir.path / "features.csv";
  io::write_features_csv(path, {});
  CHECK_THROWS_AS(io::load_features_csv(path), data_error);
}

TEST_CASE("CDF export writes one value/probability pair per line") {
  TempDir dir("cdf");
  const CdfCurve curve = empirical_cdf(std::vector<double>{1, 2, 2, 3});
  const fs::path path = dir.path / "cdf.csv";
  io::write_cdf_csv(path, curve);
  CHECK(slurp(path) ==
        "value,probability\n"
        "1,0.25\n"
        "2,0.75\n"
        "3,1\n");
}

TEST_CASE("scenario documents resolve UE profiles from the catalog") {
  TempDir dir("scenario");
  const fs::path path = dir.path / "scenario.json";
  spit(path, R"({
    "cell": {"total_rbs": 48, "rbg_size": 4, "tbs_per_rb": 100,
             "subframe_ms": 1.0},
    "duration_subframes": 500,
    "seed": 11,
    "ues": [{"crnti": 4601, "profile": "shop_amazon"},
            {"crnti": 4602, "profile": "conf_zoom_video"}]
  })");

  const SimConfig cfg = io::load_sim_config(path);
  CHECK(cfg.cell.total_rbs == 48);
  CHECK(cfg.duration_subframes == 500);
  CHECK(cfg.seed == 11);
  REQUIRE(cfg.ues.size() == 2);
  CHECK(cfg.ues[0].identity.crnti == 4601);
  CHECK(cfg.ues[0].profile.class_label == "shop_amazon");
  CHECK(cfg.ues[1].profile.qos.resource_type == ResourceType::GBR);

  // The emitted form parses back to the same scenario.
  const nlohmann::json doc = io::sim_config_to_json(cfg);
  const fs::path echo = dir.path / "echo.json";
  spit(echo, doc.dump(2) + "\n");
  const SimConfig again = io::load_sim_config(echo);
  CHECK(again.cell.total_rbs == cfg.cell.total_rbs);
  CHECK(again.ues[1].profile.class_label == "conf_zoom_video");

  const fs::path unknown = dir.path / "unknown.json";
  spit(unknown, R"({"cell": {}, "duration_subframes": 10, "seed": 1,
                    "ues": [{"crnti": 1, "profile": "no_such_app"}]})");
  CHECK_THROWS_AS(io::load_sim_config(unknown), config_error);

  const fs::path garbage = dir.path / "garbage.json";
  spit(garbage, "{not json");
  CHECK_THROWS_AS(io::load_sim_config(garbage), data_error);
}

TEST_CASE("models survive the JSON round trip node for node") {
  Dataset ds;
  SplitMix64 rng(5);
  for (int i = 0; i < 30; ++i) {
    ds.features.push_back({rng.next_double() * 10.0, rng.next_double()});
    ds.labels.push_back(i % 2 ? "video" : "voice");
  }
  EnsembleConfig cfg;
  cfg.n_estimators = 7;
  cfg.seed = 19;
  cfg.variant = ForestVariant::ExtraTrees;
  cfg.max_depth = 6;
  const ForestModel model = fit(ds, cfg);

  TempDir dir("model");
  const fs::path path = dir.path / "model.json";
  io::write_model_json(path, model);
  const ForestModel back = io::load_model_json(path);

  CHECK(back.config.variant == model.config.variant);
  CHECK(back.config.n_estimators == model.config.n_estimators);
  CHECK(back.config.seed == model.config.seed);
  REQUIRE(back.config.max_depth.has_value());
  CHECK(*back.config.max_depth == 6);
  CHECK(back.label_dictionary == model.label_dictionary);
  CHECK(back.feature_dim == model.feature_dim);
  REQUIRE(back.trees.size() == model.trees.size());
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    REQUIRE(back.trees[t].nodes.size() == model.trees[t].nodes.size());
    for (std::size_t n = 0; n < model.trees[t].nodes.size(); ++n) {
      const TreeNode& a = model.trees[t].nodes[n];
      const TreeNode& b = back.trees[t].nodes[n];
      CHECK(a.feature == b.feature);
      CHECK(a.threshold == b.threshold);
      CHECK(a.left == b.left);
      CHECK(a.right == b.right);
      CHECK(a.counts == b.counts);
    }
  }

  // Round-tripped models predict identically.
  SplitMix64 probe_rng(1);
  for (int p = 0; p < 40; ++p) {
    const std::vector<double> probe{probe_rng.next_double() * 10.0,
                                    probe_rng.next_double()};
    CHECK(predict(model, probe) == predict(back, probe));
  }

  // Rewriting the same model yields byte-identical files.
  const fs::path path2 = dir.path / "model2.json";
  io::write_model_json(path2, model);
  CHECK(io::file_digest(path) == io::file_digest(path2));
}

TEST_CASE("model files with the wrong format or version are rejected") {
  TempDir dir("model_bad");
  Dataset ds;
  ds.features = {{0.0}, {1.0}};
  ds.labels = {"a", "b"};
  EnsembleConfig cfg;
  cfg.n_estimators = 1;
  const ForestModel model = fit(ds, cfg);
  const fs::path path = dir.path / "model.json";
  io::write_model_json(path, model);

  nlohmann::json doc = nlohmann::json::parse(slurp(path));
  nlohmann::json wrong_format = doc;
  wrong_format["format"] = "something-else";
  CHECK_THROWS_AS(io::model_from_json(wrong_format), data_error);

  nlohmann::json wrong_version = doc;
  wrong_version["format_version"] = 999;
  CHECK_THROWS_AS(io::model_from_json(wrong_version), data_error);

  // Trees are stored as bare node arrays; corrupt the first tree's root.
  nlohmann::json dangling = doc;
  dangling["trees"][0][0] = {{"feature", 0},
                             {"threshold", 0.5},
                             {"left", 42},
                             {"right", 43}};
  CHECK_THROWS_AS(io::model_from_json(dangling), data_error);

  nlohmann::json bad_feature = doc;
  bad_feature["trees"][0][0] = {{"feature", 7},
                                {"threshold", 0.5},
                                {"left", -1},
                                {"right", -1}};
  CHECK_THROWS_AS(io::model_from_json(bad_feature), data_error);
}

TEST_CASE("metrics render as JSON and an aligned text table") {
  ForestModel model;
  model.label_dictionary = {"aaa", "bb"};
  model.feature_dim = 1;
  DecisionTree tree;
  TreeNode leaf;
  leaf.counts = {1, 0};
  tree.nodes.push_back(leaf);
  model.trees.push_back(tree);
  model.config.n_estimators = 1;

  Dataset test;
  test.features = {{0.0}, {1.0}, {2.0}, {3.0}};
  test.labels = {"aaa", "aaa", "bb", "bb"};
  const MetricsReport report = evaluate(model, test);

  const nlohmann::json doc = io::metrics_to_json(report);
  CHECK(doc["accuracy"].get<double>() == 0.5);
  CHECK(doc["macro_f1"].get<double>() == report.macro_f1);
  CHECK(doc["lowest_f1"]["label"].get<std::string>() == "bb");
  CHECK(doc["per_class"].size() == 2);
  CHECK(doc["confusion_matrix"][1][0].get<std::uint64_t>() == 2);

  const std::string table = io::format_metrics_table(report);
  CHECK(table.find("aaa") != std::string::npos);
  CHECK(table.find("bb") != std::string::npos);
  CHECK(table.find("accuracy") != std::string::npos);
  CHECK(table.find("macro f1") != std::string::npos);
  CHECK(table.find("lowest f1") != std::string::npos);
}

TEST_CASE("run manifests digest every artifact they mention") {
  TempDir dir("manifest");
  spit(dir.path / "out.csv", "bin_index,ul_bytes,dl_bytes\n");

  io::RunManifest manifest;
  manifest.command = "sniff";
  manifest.config_paths["log"] = "dci_log.csv";
  manifest.seeds["sim"] = 42;
  manifest.add_artifact(dir.path / "out.csv");
  manifest.stage_timings_ms.emplace_back("reconstruct", 1.5);

  REQUIRE(manifest.artifacts.size() == 1);
  CHECK(manifest.artifacts[0].second ==
        io::file_digest(dir.path / "out.csv"));

  const nlohmann::json doc = io::manifest_to_json(manifest);
  CHECK(doc["command"].get<std::string>() == "sniff");
  CHECK(doc["tool_version"].get<std::string>() == kToolVersion);
  CHECK(doc["seeds"]["sim"].get<std::uint64_t>() == 42);
  CHECK(doc["artifacts"].size() == 1);
  CHECK(doc["artifacts"][0]["digest"].get<std::string>() ==
        manifest.artifacts[0].second);
}
