#include "rrbscope/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <thread>

namespace rrb {

void validate(const Dataset& ds) {
  if (ds.features.size() != ds.labels.size())
    throw data_error("dataset: feature rows and labels differ in count");
  if (ds.features.empty()) throw data_error("dataset: no rows");
  const std::size_t d = ds.features[0].size();
  if (d == 0) throw data_error("dataset: zero-dimensional rows");
  for (const auto& row : ds.features) {
    if (row.size() != d)
      throw data_error("dataset: rows differ in dimensionality");
    for (double v : row)
      if (!std::isfinite(v)) throw data_error("dataset: non-finite feature");
  }
  for (const auto& l : ds.labels)
    if (l.empty()) throw data_error("dataset: empty label");
}

const char* to_string(ForestVariant v) {
  return v == ForestVariant::RandomForest ? "random_forest" : "extra_trees";
}

ForestVariant forest_variant_from_string(const std::string& name) {
  if (name == "random_forest") return ForestVariant::RandomForest;
  if (name == "extra_trees") return ForestVariant::ExtraTrees;
  throw config_error("unknown forest variant: " + name);
}

void validate(const EnsembleConfig& cfg) {
  if (cfg.n_estimators < 1)
    throw config_error("ensemble: n_estimators must be >= 1");
  if (cfg.min_samples_split < 2)
    throw config_error("ensemble: min_samples_split must be >= 2");
  if (cfg.max_depth && *cfg.max_depth < 1)
    throw config_error("ensemble: max_depth must be >= 1");
}

namespace detail {

double gini(std::span<const std::uint32_t> counts, std::uint64_t total) {
  if (total == 0) return 0.0;
  double sum_sq = 0.0;
  for (std::uint32_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

Split best_midpoint_split(std::span<const double> values,
                          std::span<const std::uint32_t> label_ids,
                          std::uint32_t n_labels) {
  const std::size_t n = values.size();
  Split best;
  if (n < 2) return best;

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return values[a] < values[b];
  });

  std::vector<std::uint32_t> left(n_labels, 0), right(n_labels, 0);
  for (std::uint32_t id : label_ids) right[id]++;

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::uint32_t row = order[i];
    left[label_ids[row]]++;
    right[label_ids[row]]--;
    const double lo = values[row];
    const double hi = values[order[i + 1]];
    if (lo == hi) continue;
    const double mid = lo + (hi - lo) / 2.0;
    // A midpoint that rounds up onto hi would leak hi-valued rows into the
    // left side; such a candidate no longer matches the running counts.
    if (mid >= hi) continue;
    const std::uint64_t nl = i + 1, nr = n - nl;
    const double w =
        (static_cast<double>(nl) * gini(left, nl) +
         static_cast<double>(nr) * gini(right, nr)) /
        static_cast<double>(n);
    if (w < best.weighted_impurity) {
      best.feature = 0;
      best.threshold = mid;
      best.weighted_impurity = w;
    }
  }
  return best;
}

Split random_threshold_split(std::span<const double> values,
                             std::span<const std::uint32_t> label_ids,
                             std::uint32_t n_labels, SplitMix64& rng) {
  const std::size_t n = values.size();
  Split split;
  if (n < 2) return split;

  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  if (lo == hi) return split;  // constant column, no draw consumed

  double thr = lo + rng.next_double() * (hi - lo);
  if (thr >= hi) thr = std::nextafter(hi, lo);  // keep the max on the right

  std::vector<std::uint32_t> left(n_labels, 0), right(n_labels, 0);
  std::uint64_t nl = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i] <= thr) {
      left[label_ids[i]]++;
      nl++;
    } else {
      right[label_ids[i]]++;
    }
  }
  const std::uint64_t nr = n - nl;
  split.feature = 0;
  split.threshold = thr;
  split.weighted_impurity =
      (static_cast<double>(nl) * gini(left, nl) +
       static_cast<double>(nr) * gini(right, nr)) /
      static_cast<double>(n);
  return split;
}

std::vector<std::uint32_t> bootstrap_indices(std::uint32_t n,
                                             SplitMix64& rng) {
  std::vector<std::uint32_t> out(n);
  for (auto& idx : out) idx = static_cast<std::uint32_t>(rng.next_below(n));
  return out;
}

}  // namespace detail

namespace {

// Shared per-tree context: the encoded dataset plus hyperparameters.
struct TreeBuilder {
  const std::vector<std::vector<double>>& features;
  const std::vector<std::uint32_t>& label_ids;
  std::uint32_t n_labels;
  std::size_t dim;
  std::size_t max_features;
  const EnsembleConfig& cfg;
  SplitMix64& rng;
  DecisionTree& tree;

  // Scratch buffers reused across nodes.
  std::vector<std::uint32_t> feature_pool;
  std::vector<double> col;
  std::vector<std::uint32_t> col_labels;

  std::int32_t build(std::vector<std::uint32_t> rows, int depth) {
    const std::int32_t node_id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();

    std::vector<std::uint32_t> counts(n_labels, 0);
    for (std::uint32_t r : rows) counts[label_ids[r]]++;
    const bool pure =
        std::count_if(counts.begin(), counts.end(),
                      [](std::uint32_t c) { return c > 0; }) <= 1;
    const bool depth_capped = cfg.max_depth && depth >= *cfg.max_depth;

    detail::Split best;
    if (!pure && !depth_capped &&
        rows.size() >= static_cast<std::size_t>(cfg.min_samples_split)) {
      // Partial Fisher-Yates draw of max_features distinct feature indices.
      feature_pool.resize(dim);
      std::iota(feature_pool.begin(), feature_pool.end(), 0u);
      for (std::size_t i = 0; i < max_features; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(
                                      rng.next_below(dim - i));
        std::swap(feature_pool[i], feature_pool[j]);
      }

      for (std::size_t k = 0; k < max_features; ++k) {
        const std::uint32_t f = feature_pool[k];
        col.resize(rows.size());
        col_labels.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
          col[i] = features[rows[i]][f];
          col_labels[i] = label_ids[rows[i]];
        }
        detail::Split s =
            cfg.variant == ForestVariant::RandomForest
                ? detail::best_midpoint_split(col, col_labels, n_labels)
                : detail::random_threshold_split(col, col_labels, n_labels,
                                                 rng);
        if (s.valid() && s.weighted_impurity < best.weighted_impurity) {
          s.feature = static_cast<std::int32_t>(f);
          best = s;
        }
      }
    }

    if (!best.valid()) {
      tree.nodes[node_id].counts = std::move(counts);
      return node_id;
    }

    std::vector<std::uint32_t> left_rows, right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (std::uint32_t r : rows)
      (features[r][best.feature] <= best.threshold ? left_rows : right_rows)
          .push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[node_id].feature = best.feature;
    tree.nodes[node_id].threshold = best.threshold;
    const std::int32_t l = build(std::move(left_rows), depth + 1);
    const std::int32_t r = build(std::move(right_rows), depth + 1);
    tree.nodes[node_id].left = l;
    tree.nodes[node_id].right = r;
    return node_id;
  }
};

DecisionTree train_tree(const std::vector<std::vector<double>>& features,
                        const std::vector<std::uint32_t>& label_ids,
                        std::uint32_t n_labels, const EnsembleConfig& cfg,
                        std::uint64_t tree_seed) {
  SplitMix64 rng(tree_seed);
  const std::uint32_t n = static_cast<std::uint32_t>(features.size());
  std::vector<std::uint32_t> rows;
  if (cfg.variant == ForestVariant::RandomForest) {
    rows = detail::bootstrap_indices(n, rng);
  } else {
    rows.resize(n);
    std::iota(rows.begin(), rows.end(), 0u);
  }

  const std::size_t dim = features[0].size();
  const std::size_t max_features = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(dim)))),
      1, dim);

  DecisionTree tree;
  TreeBuilder builder{features, label_ids, n_labels, dim,
                      max_features, cfg, rng, tree, {}, {}, {}};
  builder.build(std::move(rows), 0);
  return tree;
}

std::uint32_t tree_vote(const DecisionTree& tree,
                        std::span<const double> row) {
  std::int32_t id = 0;
  while (!tree.nodes[id].is_leaf()) {
    const TreeNode& node = tree.nodes[id];
    id = row[node.feature] <= node.threshold ? node.left : node.right;
  }
  const auto& counts = tree.nodes[id].counts;
  std::uint32_t best = 0;
  for (std::uint32_t c = 1; c < counts.size(); ++c)
    if (counts[c] > counts[best]) best = c;
  return best;
}

}  // namespace

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds,
                                             double train_fraction,
                                             std::uint64_t seed) {
  validate(ds);
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw config_error("split: train fraction must lie in (0, 1)");

  // Canonical row order: by label, then by feature vector. The partition is
  // then a function of the data multiset and the seed alone.
  const std::size_t n = ds.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (ds.labels[a] != ds.labels[b]) return ds.labels[a] < ds.labels[b];
    return ds.features[a] < ds.features[b];
  });

  Dataset train, test;
  std::size_t group_start = 0;
  std::uint64_t label_index = 0;
  while (group_start < n) {
    std::size_t group_end = group_start;
    const std::string& label = ds.labels[order[group_start]];
    while (group_end < n && ds.labels[order[group_end]] == label) group_end++;

    std::vector<std::uint32_t> group(order.begin() + group_start,
                                     order.begin() + group_end);
    SplitMix64 rng(substream_seed(seed, label_index));
    for (std::size_t i = group.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
      std::swap(group[i - 1], group[j]);
    }

    const std::size_t n_label = group.size();
    const std::size_t n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(n_label)));
    if (n_train == 0 || n_train == n_label)
      throw data_error("split: class '" + label +
                       "' would leave an empty partition");

    for (std::size_t i = 0; i < n_label; ++i) {
      Dataset& side = i < n_train ? train : test;
      side.features.push_back(ds.features[group[i]]);
      side.labels.push_back(label);
    }

    group_start = group_end;
    label_index++;
  }
  return {std::move(train), std::move(test)};
}

ForestModel fit(const Dataset& ds, const EnsembleConfig& cfg, int n_threads) {
  validate(ds);
  validate(cfg);
  if (n_threads < 1) throw config_error("ensemble: n_threads must be >= 1");

  ForestModel model;
  model.config = cfg;
  model.feature_dim = ds.dim();

  model.label_dictionary = ds.labels;
  std::sort(model.label_dictionary.begin(), model.label_dictionary.end());
  model.label_dictionary.erase(std::unique(model.label_dictionary.begin(),
                                           model.label_dictionary.end()),
                               model.label_dictionary.end());

  std::vector<std::uint32_t> label_ids(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto it =
        std::lower_bound(model.label_dictionary.begin(),
                         model.label_dictionary.end(), ds.labels[i]);
    label_ids[i] = static_cast<std::uint32_t>(
        it - model.label_dictionary.begin());
  }
  const auto n_labels =
      static_cast<std::uint32_t>(model.label_dictionary.size());

  model.trees.resize(cfg.n_estimators);
  const auto train_range = [&](int first, int last) {
    for (int t = first; t < last; ++t)
      model.trees[t] = train_tree(ds.features, label_ids, n_labels, cfg,
                                  substream_seed(cfg.seed, t));
  };

  const int workers = std::min(n_threads, cfg.n_estimators);
  if (workers <= 1) {
    train_range(0, cfg.n_estimators);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (cfg.n_estimators + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int first = w * chunk;
      const int last = std::min(cfg.n_estimators, first + chunk);
      if (first < last) pool.emplace_back(train_range, first, last);
    }
    for (auto& th : pool) th.join();
  }
  return model;
}

std::string predict(const ForestModel& model, std::span<const double> row) {
  if (row.size() != model.feature_dim)
    throw data_error("predict: row dimensionality does not match model");
  std::vector<std::uint32_t> votes(model.label_dictionary.size(), 0);
  for (const auto& tree : model.trees) votes[tree_vote(tree, row)]++;
  std::uint32_t best = 0;
  for (std::uint32_t c = 1; c < votes.size(); ++c)
    if (votes[c] > votes[best]) best = c;  // tie keeps the smaller index
  return model.label_dictionary[best];
}

MetricsReport evaluate(const ForestModel& model, const Dataset& test) {
  validate(test);
  const auto& dict = model.label_dictionary;
  const std::size_t k = dict.size();

  const auto class_id = [&](const std::string& label) {
    const auto it = std::lower_bound(dict.begin(), dict.end(), label);
    if (it == dict.end() || *it != label)
      throw data_error("evaluate: label '" + label +
                       "' is not in the model dictionary");
    return static_cast<std::size_t>(it - dict.begin());
  };

  MetricsReport report;
  report.labels = dict;
  report.confusion.assign(k, std::vector<std::uint64_t>(k, 0));

  std::uint64_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const std::size_t actual = class_id(test.labels[i]);
    const std::size_t predicted = class_id(predict(model, test.features[i]));
    report.confusion[actual][predicted]++;
    if (actual == predicted) correct++;
  }
  report.accuracy =
      static_cast<double>(correct) / static_cast<double>(test.size());

  for (std::size_t c = 0; c < k; ++c) {
    std::uint64_t tp = report.confusion[c][c], fp = 0, fn = 0;
    for (std::size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += report.confusion[o][c];
      fn += report.confusion[c][o];
    }
    ClassMetrics m;
    m.label = dict[c];
    m.support = tp + fn;
    m.precision = tp + fp == 0 ? 0.0
                               : static_cast<double>(tp) /
                                     static_cast<double>(tp + fp);
    m.recall = tp + fn == 0 ? 0.0
                            : static_cast<double>(tp) /
                                  static_cast<double>(tp + fn);
    m.f1 = m.precision + m.recall == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    report.per_class.push_back(std::move(m));
  }

  for (const auto& m : report.per_class) {
    report.macro_precision += m.precision / static_cast<double>(k);
    report.macro_recall += m.recall / static_cast<double>(k);
    report.macro_f1 += m.f1 / static_cast<double>(k);
  }

  std::size_t lowest = 0;
  for (std::size_t c = 1; c < k; ++c)
    if (report.per_class[c].f1 < report.per_class[lowest].f1) lowest = c;
  report.lowest_f1_label = report.per_class[lowest].label;
  report.lowest_f1 = report.per_class[lowest].f1;
  return report;
}

}  // namespace rrb
