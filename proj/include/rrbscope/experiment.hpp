#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rrbscope/ensemble.hpp"
#include "rrbscope/pipeline.hpp"
#include "rrbscope/radio.hpp"
#include "rrbscope/sniffer.hpp"

namespace rrb {

/// The full synthetic study: every catalog class simulated for a number of
/// independent traces, reconstructed by the sniffer, featurized, split, and
/// classified by both forest variants.
struct ExperimentConfig {
  CellConfig cell;
  std::uint64_t duration_subframes = 20000;
  std::uint64_t bin_subframes = 100;
  int iterations_per_class = 20;
  std::uint64_t seed = 42;
  double train_fraction = 0.7;
  PipelineConfig pipeline;
  int n_estimators = 100;
  int n_threads = 1;
};

void validate(const ExperimentConfig& cfg);

/// One simulated capture: which class, which iteration, the seed its
/// simulation ran under, and the sniffer's reconstruction.
struct TraceRecord {
  std::string class_label;
  int iteration = 0;
  std::uint64_t sim_seed = 0;
  VictimTrace trace;
};

struct ExperimentResult {
  std::vector<TraceRecord> traces;  // class-major, then iteration
  std::vector<FeatureVector> feature_rows;
  Dataset dataset;
  Dataset train;
  Dataset test;
  ForestModel rf_model;
  ForestModel et_model;
  MetricsReport rf_report;
  MetricsReport et_report;
};

/// Seed for the simulation of (class_index, iteration), derived from the
/// experiment seed so one top-level seed pins every artifact.
std::uint64_t trace_seed(std::uint64_t experiment_seed,
                         std::uint64_t class_index, std::uint64_t iteration);

/// Simulates one trace of the given class and reconstructs it from the DCI
/// log (the victim is the only device in the cell).
VictimTrace capture_trace(const ExperimentConfig& cfg,
                          const AppProfile& profile, std::uint64_t sim_seed);

/// Runs the whole study. Trace captures and tree training may fan out over
/// n_threads; results are independent of the thread count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace rrb
