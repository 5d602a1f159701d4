#include "rrbscope/experiment.hpp"

#include <atomic>
#include <thread>

#include "rrbscope/profiles.hpp"
#include "rrbscope/rng.hpp"
#include "rrbscope/sim.hpp"

namespace rrb {

namespace {

// Every synthetic capture uses the same victim C-RNTI; traces live in
// separate single-device cells, so there is nothing to disambiguate.
constexpr std::uint16_t kVictimRnti = 4601;

}  // namespace

void validate(const ExperimentConfig& cfg) {
  validate(cfg.cell);
  validate(cfg.pipeline);
  if (cfg.duration_subframes < 1)
    throw config_error("experiment: duration_subframes must be >= 1");
  if (cfg.bin_subframes < 1)
    throw config_error("experiment: bin_subframes must be >= 1");
  if (cfg.iterations_per_class < 2)
    throw config_error("experiment: need >= 2 iterations per class to split");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
    throw config_error("experiment: train_fraction must lie in (0, 1)");
  if (cfg.n_estimators < 1)
    throw config_error("experiment: n_estimators must be >= 1");
  if (cfg.n_threads < 1)
    throw config_error("experiment: n_threads must be >= 1");
}

std::uint64_t trace_seed(std::uint64_t experiment_seed,
                         std::uint64_t class_index, std::uint64_t iteration) {
  return substream_seed(experiment_seed, class_index, iteration);
}

VictimTrace capture_trace(const ExperimentConfig& cfg,
                          const AppProfile& profile, std::uint64_t sim_seed) {
  SimConfig sim;
  sim.cell = cfg.cell;
  sim.duration_subframes = cfg.duration_subframes;
  sim.seed = sim_seed;
  SimUe ue;
  ue.identity = UeIdentity{kVictimRnti};
  ue.profile = profile;
  ue.queues[0].qos = profile.qos;
  ue.queues[1].qos = profile.qos;
  sim.ues.push_back(std::move(ue));

  const auto [log, truth] = run_simulation(sim);
  return reconstruct_throughput(log, UeIdentity{kVictimRnti},
                                cfg.bin_subframes, cfg.cell.subframe_ms);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::vector<AppProfile> catalog =
      profile_catalog(cfg.duration_subframes);

  ExperimentResult result;
  const std::size_t n_traces = catalog.size() * cfg.iterations_per_class;
  result.traces.resize(n_traces);

  // Each (class, iteration) cell is independent and lands in its own slot,
  // so the fan-out cannot affect the result.
  std::atomic<std::size_t> next{0};
  const auto capture_worker = [&] {
    while (true) {
      const std::size_t job = next.fetch_add(1);
      if (job >= n_traces) return;
      const std::size_t c = job / cfg.iterations_per_class;
      const std::size_t i = job % cfg.iterations_per_class;
      TraceRecord& record = result.traces[job];
      record.class_label = catalog[c].class_label;
      record.iteration = static_cast<int>(i);
      record.sim_seed = trace_seed(cfg.seed, c, i);
      record.trace = capture_trace(cfg, catalog[c], record.sim_seed);
    }
  };
  if (cfg.n_threads == 1) {
    capture_worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < cfg.n_threads; ++w)
      pool.emplace_back(capture_worker);
    for (auto& th : pool) th.join();
  }

  for (const TraceRecord& record : result.traces) {
    FeatureVector row =
        extract_features(record.trace.ul, record.trace.dl, cfg.pipeline);
    row.class_label = record.class_label;
    const auto values = row.as_array();
    result.dataset.features.emplace_back(values.begin(), values.end());
    result.dataset.labels.push_back(record.class_label);
    result.feature_rows.push_back(std::move(row));
  }

  std::tie(result.train, result.test) =
      train_test_split(result.dataset, cfg.train_fraction, cfg.seed);

  EnsembleConfig forest;
  forest.n_estimators = cfg.n_estimators;
  forest.seed = cfg.seed;

  forest.variant = ForestVariant::RandomForest;
  result.rf_model = fit(result.train, forest, cfg.n_threads);
  result.rf_report = evaluate(result.rf_model, result.test);

  forest.variant = ForestVariant::ExtraTrees;
  result.et_model = fit(result.train, forest, cfg.n_threads);
  result.et_report = evaluate(result.et_model, result.test);

  return result;
}

}  // namespace rrb
