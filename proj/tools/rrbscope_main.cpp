// rrbscope — passive 5G radio-resource side-channel toolkit.
//
// Pipeline: simulate a cell serving one application class, eavesdrop the
// plaintext DCI grant stream, rebuild the victim's throughput trace, extract
// features, and classify which application the victim was running.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rrbscope/ensemble.hpp"
#include "rrbscope/experiment.hpp"
#include "rrbscope/io.hpp"
#include "rrbscope/pipeline.hpp"
#include "rrbscope/profiles.hpp"
#include "rrbscope/sim.hpp"
#include "rrbscope/sniffer.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

void print_manifest(const rrb::io::RunManifest& manifest) {
  std::cout << rrb::io::manifest_to_json(manifest).dump(2) << '\n';
}

/// Derives the per-direction output path: "cdf.csv" -> "cdf_ul.csv".
fs::path direction_path(const fs::path& base, rrb::Direction d) {
  fs::path out = base;
  const std::string suffix =
      std::string("_") + (d == rrb::Direction::Uplink ? "ul" : "dl");
  out.replace_filename(base.stem().string() + suffix +
                       base.extension().string());
  return out;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string config_path;
  std::string out_dir;
};

int cmd_simulate(const SimulateArgs& args) {
  rrb::io::RunManifest manifest;
  manifest.command = "simulate";
  manifest.config_paths["scenario"] = args.config_path;

  const auto t0 = Clock::now();
  const rrb::SimConfig config = rrb::io::load_sim_config(args.config_path);
  manifest.seeds["simulation"] = config.seed;

  const auto [log, truth] = rrb::run_simulation(config);
  manifest.stage_timings_ms.emplace_back("simulate", ms_since(t0));

  const auto t1 = Clock::now();
  const fs::path dir(args.out_dir);
  fs::create_directories(dir);
  rrb::io::write_dci_log_csv(dir / "dci_log.csv", log);
  rrb::io::write_rar_csv(dir / "rar_events.csv", log);
  rrb::io::write_ground_truth_csv(dir / "ground_truth.csv", truth);
  manifest.add_artifact(dir / "dci_log.csv");
  manifest.add_artifact(dir / "rar_events.csv");
  manifest.add_artifact(dir / "ground_truth.csv");
  manifest.stage_timings_ms.emplace_back("write", ms_since(t1));

  print_manifest(manifest);
  return 0;
}

// --- sniff ------------------------------------------------------------------

struct SniffArgs {
  std::string log_path;
  std::string rar_path;
  std::uint32_t rnti = 0;
  std::uint64_t bin_subframes = 100;
  std::uint64_t duration = 0;  // 0 = infer from the log
  std::string out_path;
};

int cmd_sniff(const SniffArgs& args) {
  rrb::io::RunManifest manifest;
  manifest.command = "sniff";
  manifest.config_paths["dci_log"] = args.log_path;
  manifest.config_paths["rar_events"] = args.rar_path;

  const auto t0 = Clock::now();
  const rrb::DciLog log = rrb::io::load_dci_log_csv(
      args.log_path, args.rar_path,
      static_cast<std::uint32_t>(args.duration));
  if (args.rnti > 0xffff) throw rrb::config_error("rnti exceeds 16 bits");

  const rrb::VictimTrace trace = rrb::reconstruct_throughput(
      log, rrb::UeIdentity{static_cast<std::uint16_t>(args.rnti)},
      args.bin_subframes);
  manifest.stage_timings_ms.emplace_back("reconstruct", ms_since(t0));

  rrb::io::write_trace_csv(args.out_path, trace);
  manifest.add_artifact(args.out_path);
  if (trace.partial_tail)
    std::cerr << "note: last bin covers fewer subframes than the rest\n";

  print_manifest(manifest);
  return 0;
}

// --- dataset ----------------------------------------------------------------

struct DatasetArgs {
  std::string traces_dir;
  std::string out_path;
  bool average_iterations = false;
};

int cmd_dataset(const DatasetArgs& args) {
  rrb::io::RunManifest manifest;
  manifest.command = "dataset";
  manifest.config_paths["traces_dir"] = args.traces_dir;

  const fs::path root(args.traces_dir);
  if (!fs::is_directory(root))
    throw rrb::data_error("not a directory: " + root.string());

  // Label = subdirectory name; every *.csv inside is one trace of that
  // label. Paths are sorted so the output is independent of listing order.
  std::vector<fs::path> label_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) label_dirs.push_back(entry.path());
  std::sort(label_dirs.begin(), label_dirs.end());
  if (label_dirs.empty())
    throw rrb::data_error("no label subdirectories in " + root.string());

  const rrb::PipelineConfig pipeline;
  std::vector<rrb::FeatureVector> rows;
  std::uint64_t skipped = 0;

  const auto t0 = Clock::now();
  for (const fs::path& label_dir : label_dirs) {
    const std::string label = label_dir.filename().string();
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(label_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".csv")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<rrb::ThroughputSeries> ul_series, dl_series;
    for (const fs::path& file : files) {
      const rrb::VictimTrace trace = rrb::io::load_trace_csv(file);
      if (args.average_iterations) {
        ul_series.push_back(trace.ul);
        dl_series.push_back(trace.dl);
        continue;
      }
      try {
        rrb::FeatureVector row =
            rrb::extract_features(trace.ul, trace.dl, pipeline);
        row.class_label = label;
        rows.push_back(std::move(row));
      } catch (const rrb::data_error& e) {
        std::cerr << "warning: skipping degenerate trace " << file.string()
                  << ": " << e.what() << '\n';
        skipped++;
      }
    }

    if (args.average_iterations && !ul_series.empty()) {
      try {
        rrb::FeatureVector row = rrb::extract_features(
            rrb::average_iterations(ul_series),
            rrb::average_iterations(dl_series), pipeline);
        row.class_label = label;
        rows.push_back(std::move(row));
      } catch (const rrb::data_error& e) {
        std::cerr << "warning: skipping degenerate class " << label << ": "
                  << e.what() << '\n';
        skipped++;
      }
    }
  }
  if (rows.empty())
    throw rrb::data_error("no usable traces under " + root.string());
  manifest.stage_timings_ms.emplace_back("featurize", ms_since(t0));

  rrb::io::write_features_csv(args.out_path, rows);
  manifest.add_artifact(args.out_path);
  std::cerr << "feature rows: " << rows.size() << ", skipped: " << skipped
            << '\n';

  print_manifest(manifest);
  return 0;
}

// --- train-eval -------------------------------------------------------------

struct TrainEvalArgs {
  std::string dataset_path;
  std::string variant = "rf";
  std::string model_path;
  std::string report_path;
  std::uint64_t seed = 42;
  int trees = 100;
  double train_fraction = 0.7;
  int threads = 1;
  int max_depth = 0;  // 0 = unlimited
};

int cmd_train_eval(const TrainEvalArgs& args) {
  rrb::io::RunManifest manifest;
  manifest.command = "train-eval";
  manifest.config_paths["dataset"] = args.dataset_path;
  manifest.seeds["ensemble"] = args.seed;

  rrb::EnsembleConfig cfg;
  cfg.variant = args.variant == "rf" ? rrb::ForestVariant::RandomForest
                                     : rrb::ForestVariant::ExtraTrees;
  cfg.n_estimators = args.trees;
  cfg.seed = args.seed;
  if (args.max_depth > 0) cfg.max_depth = args.max_depth;

  const rrb::Dataset ds = rrb::io::load_features_csv(args.dataset_path);
  const auto [train, test] =
      rrb::train_test_split(ds, args.train_fraction, args.seed);

  const auto t0 = Clock::now();
  const rrb::ForestModel model = rrb::fit(train, cfg, args.threads);
  manifest.stage_timings_ms.emplace_back("fit", ms_since(t0));

  const auto t1 = Clock::now();
  const rrb::MetricsReport report = rrb::evaluate(model, test);
  manifest.stage_timings_ms.emplace_back("evaluate", ms_since(t1));

  rrb::io::write_model_json(args.model_path, model);
  rrb::io::write_metrics_json(args.report_path, report);
  manifest.add_artifact(args.model_path);
  manifest.add_artifact(args.report_path);

  std::cout << rrb::io::format_metrics_table(report) << '\n';
  print_manifest(manifest);
  return 0;
}

// --- cdf --------------------------------------------------------------------

struct CdfArgs {
  std::string trace_path;
  std::string out_path;
  double window_fraction = 0.2;
};

int cmd_cdf(const CdfArgs& args) {
  rrb::io::RunManifest manifest;
  manifest.command = "cdf";
  manifest.config_paths["trace"] = args.trace_path;

  rrb::PipelineConfig pipeline;
  pipeline.window_fraction = args.window_fraction;
  validate(pipeline);

  const rrb::VictimTrace trace = rrb::io::load_trace_csv(args.trace_path);
  if (trace.ul.values.empty())
    throw rrb::data_error("trace has no bins: " + args.trace_path);

  for (const rrb::Direction d :
       {rrb::Direction::Uplink, rrb::Direction::Downlink}) {
    const rrb::ThroughputSeries& series =
        d == rrb::Direction::Uplink ? trace.ul : trace.dl;
    const rrb::ThroughputSeries normalized =
        rrb::rolling_normalize(series, pipeline);
    const rrb::CdfCurve cdf = rrb::empirical_cdf(normalized.values);
    const fs::path out = direction_path(args.out_path, d);
    rrb::io::write_cdf_csv(out, cdf);
    manifest.add_artifact(out);
  }

  print_manifest(manifest);
  return 0;
}

// --- experiment -------------------------------------------------------------

struct ExperimentArgs {
  std::string out_dir;
  std::uint64_t seed = 42;
  int iterations = 20;
  std::uint64_t duration = 20000;
  std::uint64_t bin = 100;
  int trees = 100;
  double train_fraction = 0.7;
  int threads = 4;
  bool write_traces = false;
};

int cmd_experiment(const ExperimentArgs& args) {
  rrb::io::RunManifest manifest;
  manifest.command = "experiment";
  manifest.seeds["experiment"] = args.seed;

  rrb::ExperimentConfig cfg;
  cfg.seed = args.seed;
  cfg.iterations_per_class = args.iterations;
  cfg.duration_subframes = args.duration;
  cfg.bin_subframes = args.bin;
  cfg.n_estimators = args.trees;
  cfg.train_fraction = args.train_fraction;
  cfg.n_threads = args.threads;

  const auto t0 = Clock::now();
  const rrb::ExperimentResult result = rrb::run_experiment(cfg);
  manifest.stage_timings_ms.emplace_back("experiment", ms_since(t0));

  const fs::path dir(args.out_dir);
  fs::create_directories(dir);

  rrb::io::write_features_csv(dir / "features.csv", result.feature_rows);
  manifest.add_artifact(dir / "features.csv");

  rrb::io::write_model_json(dir / "rf_model.json", result.rf_model);
  rrb::io::write_metrics_json(dir / "rf_report.json", result.rf_report);
  rrb::io::write_model_json(dir / "et_model.json", result.et_model);
  rrb::io::write_metrics_json(dir / "et_report.json", result.et_report);
  manifest.add_artifact(dir / "rf_model.json");
  manifest.add_artifact(dir / "rf_report.json");
  manifest.add_artifact(dir / "et_model.json");
  manifest.add_artifact(dir / "et_report.json");

  if (args.write_traces) {
    for (const rrb::TraceRecord& record : result.traces) {
      const fs::path label_dir = dir / "traces" / record.class_label;
      fs::create_directories(label_dir);
      char name[32];
      std::snprintf(name, sizeof(name), "iter%02d.csv", record.iteration);
      const fs::path out = label_dir / name;
      rrb::io::write_trace_csv(out, record.trace);
      manifest.add_artifact(out);
    }
  }

  std::cout << "=== random forest ===\n"
            << rrb::io::format_metrics_table(result.rf_report) << '\n'
            << "=== extra trees ===\n"
            << rrb::io::format_metrics_table(result.et_report) << '\n';
  print_manifest(manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "rrbscope: passive radio-resource side channel — simulate a cell, "
      "sniff plaintext scheduling grants, fingerprint the application"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rrb::kToolVersion));

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Run the cell simulation from a scenario JSON");
  sim->add_option("--config", sim_args.config_path, "Scenario JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--out-dir", sim_args.out_dir,
                  "Directory for dci_log.csv, rar_events.csv, "
                  "ground_truth.csv")
      ->required();

  SniffArgs sniff_args;
  CLI::App* sniff = app.add_subcommand(
      "sniff", "Reconstruct a victim's throughput from a DCI log");
  sniff->add_option("--log", sniff_args.log_path, "DCI grant CSV")
      ->required()
      ->check(CLI::ExistingFile);
  sniff->add_option("--rar", sniff_args.rar_path, "RAR event CSV")
      ->required()
      ->check(CLI::ExistingFile);
  sniff->add_option("--rnti", sniff_args.rnti, "Victim C-RNTI")->required();
  sniff->add_option("--bin", sniff_args.bin_subframes,
                    "Bin width in subframes");
  sniff->add_option("--duration", sniff_args.duration,
                    "Log duration in subframes (0 = infer)");
  sniff->add_option("--out", sniff_args.out_path, "Output trace CSV")
      ->required();

  DatasetArgs ds_args;
  CLI::App* dataset = app.add_subcommand(
      "dataset", "Extract feature rows from a directory of labeled traces");
  dataset
      ->add_option("--traces-dir", ds_args.traces_dir,
                   "Directory with one subdirectory per label")
      ->required();
  dataset->add_option("--out", ds_args.out_path, "Output feature CSV")
      ->required();
  dataset->add_flag("--average-iterations", ds_args.average_iterations,
                    "Average each label's traces into one row");

  TrainEvalArgs te_args;
  CLI::App* train = app.add_subcommand(
      "train-eval", "Train a forest on a feature CSV and report metrics");
  train->add_option("--dataset", te_args.dataset_path, "Feature CSV")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--variant", te_args.variant, "rf | extra-trees")
      ->check(CLI::IsMember({"rf", "extra-trees"}));
  train->add_option("--out-model", te_args.model_path, "Model JSON path")
      ->required();
  train->add_option("--out-report", te_args.report_path, "Report JSON path")
      ->required();
  train->add_option("--seed", te_args.seed, "Split and training seed");
  train->add_option("--trees", te_args.trees, "Number of trees");
  train->add_option("--train-fraction", te_args.train_fraction,
                    "Training fraction of each class");
  train->add_option("--threads", te_args.threads,
                    "Training threads (result is thread-count independent)");
  train->add_option("--max-depth", te_args.max_depth,
                    "Depth limit (0 = unlimited)");

  CdfArgs cdf_args;
  CLI::App* cdf = app.add_subcommand(
      "cdf", "Export normalized-throughput CDFs from a trace CSV");
  cdf->add_option("--trace", cdf_args.trace_path, "Trace CSV")
      ->required()
      ->check(CLI::ExistingFile);
  cdf->add_option("--out", cdf_args.out_path,
                  "Output base path; _ul/_dl are inserted before the "
                  "extension")
      ->required();
  cdf->add_option("--window-fraction", cdf_args.window_fraction,
                  "Rolling normalization window as a fraction of length");

  ExperimentArgs exp_args;
  CLI::App* experiment = app.add_subcommand(
      "experiment",
      "Full synthetic study: simulate every class, featurize, train and "
      "evaluate both forest variants");
  experiment->add_option("--out-dir", exp_args.out_dir, "Output directory")
      ->required();
  experiment->add_option("--seed", exp_args.seed, "Top-level seed");
  experiment->add_option("--iterations", exp_args.iterations,
                         "Traces per class");
  experiment->add_option("--duration", exp_args.duration,
                         "Trace length in subframes");
  experiment->add_option("--bin", exp_args.bin, "Bin width in subframes");
  experiment->add_option("--trees", exp_args.trees, "Number of trees");
  experiment->add_option("--train-fraction", exp_args.train_fraction,
                         "Training fraction of each class");
  experiment->add_option("--threads", exp_args.threads, "Worker threads");
  experiment->add_flag("--write-traces", exp_args.write_traces,
                       "Also write every reconstructed trace CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (sniff->parsed()) return cmd_sniff(sniff_args);
    if (dataset->parsed()) return cmd_dataset(ds_args);
    if (train->parsed()) return cmd_train_eval(te_args);
    if (cdf->parsed()) return cmd_cdf(cdf_args);
    if (experiment->parsed()) return cmd_experiment(exp_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;  // unreachable with require_subcommand(1)
}
