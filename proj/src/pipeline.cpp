#include "rrbscope/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace rrb {

void validate(const PipelineConfig& cfg) {
  if (!(cfg.window_fraction > 0.0) || cfg.window_fraction > 1.0)
    throw config_error("window_fraction must be in (0,1]");
  if (!(cfg.iqr_multiplier > 0.0))
    throw config_error("iqr_multiplier must be > 0");
  if (!(cfg.cap_percentile > 0.0) || cfg.cap_percentile >= 100.0)
    throw config_error("cap_percentile must be in (0,100)");
  if (cfg.min_window < 1) throw config_error("min_window must be >= 1");
}

double mean(std::span<const double> data) {
  if (data.empty()) throw data_error("mean of empty data");
  double sum = 0.0;
  for (double x : data) sum += x;
  return sum / static_cast<double>(data.size());
}

double stddev_pop(std::span<const double> data) {
  const double m = mean(data);
  double acc = 0.0;
  for (double x : data) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(data.size()));
}

double percentile(std::span<const double> data, double p) {
  if (data.empty()) throw data_error("percentile of empty data");
  if (p < 0.0 || p > 100.0)
    throw data_error("percentile p must be in [0,100]");
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const double idx = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(idx);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = idx - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> remove_zeros(std::span<const double> data) {
  std::vector<double> out;
  out.reserve(data.size());
  for (double x : data)
    if (x > 0.0) out.push_back(x);
  if (out.empty())
    throw data_error("trace is all zeros after zero removal");
  return out;
}

std::vector<double> iqr_cap(std::span<const double> data,
                            const PipelineConfig& cfg) {
  if (data.empty()) throw data_error("iqr_cap of empty data");
  const double q1 = percentile(data, 25.0);
  const double q3 = percentile(data, 75.0);
  const double upper = q3 + cfg.iqr_multiplier * (q3 - q1);
  const double cap = percentile(data, cfg.cap_percentile);
  std::vector<double> out(data.begin(), data.end());
  for (double& x : out)
    if (x > upper) x = cap;
  return out;
}

ThroughputSeries rolling_normalize(const ThroughputSeries& series,
                                   const PipelineConfig& cfg) {
  validate(cfg);
  const std::size_t n = series.values.size();
  ThroughputSeries out;
  out.bin_width_ms = series.bin_width_ms;
  out.unit = SeriesUnit::Normalized;
  out.values.resize(n);
  if (n == 0) return out;
  const std::size_t w = std::max<std::size_t>(
      static_cast<std::size_t>(cfg.min_window),
      static_cast<std::size_t>(
          std::llround(cfg.window_fraction * static_cast<double>(n))));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t begin = i + 1 >= w ? i + 1 - w : 0;
    double lo = series.values[begin];
    double hi = series.values[begin];
    for (std::size_t j = begin; j <= i; ++j) {
      lo = std::min(lo, series.values[j]);
      hi = std::max(hi, series.values[j]);
    }
    out.values[i] = hi > lo ? (series.values[i] - lo) / (hi - lo) : 0.0;
  }
  return out;
}

double slope(std::span<const double> data) {
  const std::size_t n = data.size();
  if (n < 2) throw data_error("slope needs at least 2 points");
  const double x_mean = static_cast<double>(n - 1) / 2.0;
  double y_sum = 0.0;
  for (double y : data) y_sum += y;
  const double y_mean = y_sum / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - x_mean;
    sxy += dx * (data[i] - y_mean);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ThroughputSeries average_iterations(std::span<const ThroughputSeries> traces) {
  if (traces.empty()) throw data_error("average_iterations of no traces");
  std::size_t shortest = traces[0].values.size();
  for (const auto& t : traces) {
    if (t.bin_width_ms != traces[0].bin_width_ms)
      throw data_error("average_iterations requires equal bin widths");
    shortest = std::min(shortest, t.values.size());
  }
  ThroughputSeries out;
  out.bin_width_ms = traces[0].bin_width_ms;
  out.unit = traces[0].unit;
  out.values.assign(shortest, 0.0);
  for (const auto& t : traces)
    for (std::size_t i = 0; i < shortest; ++i) out.values[i] += t.values[i];
  for (double& v : out.values) v /= static_cast<double>(traces.size());
  return out;
}

namespace {

struct DirectionFeatures {
  double mean_v, std_v, slope_v, q1_v, q3_v;
};

DirectionFeatures direction_features(const ThroughputSeries& series,
                                     const PipelineConfig& cfg,
                                     const char* name) {
  if (series.values.empty())
    throw data_error(std::string(name) + " series is empty");
  std::vector<double> clean;
  try {
    clean = iqr_cap(remove_zeros(series.values), cfg);
  } catch (const data_error&) {
    throw data_error(std::string(name) +
                     " trace is degenerate: no positive samples");
  }
  if (clean.size() < 2)
    throw data_error(std::string(name) +
                     " trace is degenerate: fewer than 2 positive samples");
  return {mean(clean), stddev_pop(clean), slope(clean),
          percentile(clean, 25.0), percentile(clean, 75.0)};
}

}  // namespace

FeatureVector extract_features(const ThroughputSeries& ul,
                               const ThroughputSeries& dl,
                               const PipelineConfig& cfg) {
  validate(cfg);
  const DirectionFeatures u = direction_features(ul, cfg, "UL");
  const DirectionFeatures d = direction_features(dl, cfg, "DL");
  FeatureVector fv;
  fv.ul_mean = u.mean_v;
  fv.ul_std = u.std_v;
  fv.ul_slope = u.slope_v;
  fv.ul_q1 = u.q1_v;
  fv.ul_q3 = u.q3_v;
  fv.dl_mean = d.mean_v;
  fv.dl_std = d.std_v;
  fv.dl_slope = d.slope_v;
  fv.dl_q1 = d.q1_v;
  fv.dl_q3 = d.q3_v;
  return fv;
}

CdfCurve empirical_cdf(std::span<const double> data) {
  if (data.empty()) throw data_error("empirical_cdf of empty data");
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  CdfCurve curve;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const bool last_of_value =
        i + 1 == sorted.size() || sorted[i + 1] != sorted[i];
    if (last_of_value) {
      curve.values.push_back(sorted[i]);
      curve.probabilities.push_back(static_cast<double>(i + 1) / n);
    }
  }
  return curve;
}

double pearson_correlation(std::span<const double> a,
                           std::span<const double> b) {
  if (a.size() != b.size())
    throw data_error("pearson_correlation requires equal lengths");
  if (a.size() < 2)
    throw data_error("pearson_correlation needs at least 2 points");
  const double ma = mean(a);
  const double mb = mean(b);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0)
    throw data_error("pearson_correlation undefined for constant input");
  return sab / std::sqrt(saa * sbb);
}

}  // namespace rrb
