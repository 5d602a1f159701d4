#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rrbscope/common.hpp"
#include "rrbscope/rng.hpp"

namespace rrb {

/// Labeled feature rows. Rows are position-aligned between features and
/// labels; all rows share one dimensionality.
struct Dataset {
  std::vector<std::vector<double>> features;
  std::vector<std::string> labels;

  std::size_t size() const { return features.size(); }
  std::size_t dim() const { return features.empty() ? 0 : features[0].size(); }
};

void validate(const Dataset& ds);

enum class ForestVariant { RandomForest, ExtraTrees };

const char* to_string(ForestVariant v);
ForestVariant forest_variant_from_string(const std::string& name);

/// Hyperparameters. max_features is fixed at floor(sqrt(d)), clamped to
/// [1, d], matching the classifiers' standard defaults.
struct EnsembleConfig {
  ForestVariant variant = ForestVariant::RandomForest;
  int n_estimators = 100;
  std::uint64_t seed = 42;
  int min_samples_split = 2;
  std::optional<int> max_depth;  // unlimited when unset
};

void validate(const EnsembleConfig& cfg);

/// Binary tree in a flat array. feature < 0 marks a leaf carrying the class
/// histogram of its training partition.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<std::uint32_t> counts;

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
};

struct ForestModel {
  EnsembleConfig config;
  std::vector<std::string> label_dictionary;  // sorted, index = class id
  std::size_t feature_dim = 0;
  std::vector<DecisionTree> trees;
};

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct MetricsReport {
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::string lowest_f1_label;
  double lowest_f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  std::vector<std::string> labels;
  std::vector<std::vector<std::uint64_t>> confusion;  // [actual][predicted]
};

/// Stratified shuffle split. Rows are first brought into a canonical order
/// (label, then features lexicographically) so the partition depends only on
/// the data multiset and the seed, not on input row order. Each label
/// contributes round(train_fraction * n_label) rows to train; both sides
/// must end up non-empty for every label.
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds,
                                             double train_fraction,
                                             std::uint64_t seed);

/// Trains the forest. Tree t draws everything from a substream of
/// (cfg.seed, t), so results are identical for any n_threads.
ForestModel fit(const Dataset& ds, const EnsembleConfig& cfg,
                int n_threads = 1);

/// Majority vote over the trees; ties go to the smallest dictionary index.
std::string predict(const ForestModel& model, std::span<const double> row);

MetricsReport evaluate(const ForestModel& model, const Dataset& test);

namespace detail {

double gini(std::span<const std::uint32_t> counts, std::uint64_t total);

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double weighted_impurity = std::numeric_limits<double>::infinity();

  bool valid() const { return feature >= 0; }
};

/// Best midpoint split on one feature column (the Random Forest rule).
/// Returns an invalid split when the column is constant.
Split best_midpoint_split(std::span<const double> values,
                          std::span<const std::uint32_t> label_ids,
                          std::uint32_t n_labels);

/// Candidate split at one uniform-random threshold (the Extra Trees rule).
Split random_threshold_split(std::span<const double> values,
                             std::span<const std::uint32_t> label_ids,
                             std::uint32_t n_labels, SplitMix64& rng);

std::vector<std::uint32_t> bootstrap_indices(std::uint32_t n,
                                             SplitMix64& rng);

}  // namespace detail

}  // namespace rrb
