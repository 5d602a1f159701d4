#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rrbscope/common.hpp"

namespace rrb {

enum class SeriesUnit { RawBytes, Normalized };

/// Time-binned throughput in one direction. values[k] is the byte count (or
/// normalized level) observed in bin k.
struct ThroughputSeries {
  double bin_width_ms = 1.0;
  SeriesUnit unit = SeriesUnit::RawBytes;
  std::vector<double> values;
};

struct PipelineConfig {
  double window_fraction = 0.2;  // rolling window as a fraction of length
  double iqr_multiplier = 2.0;   // outlier bound is Q3 + multiplier * IQR
  double cap_percentile = 95.0;  // replacement value for capped outliers
  int min_window = 2;
};

void validate(const PipelineConfig& cfg);

/// The 10 scalars fed to the classifiers: mean, population STD, OLS slope,
/// Q1 and Q3, for UL and DL.
struct FeatureVector {
  double ul_mean = 0, ul_std = 0, ul_slope = 0, ul_q1 = 0, ul_q3 = 0;
  double dl_mean = 0, dl_std = 0, dl_slope = 0, dl_q1 = 0, dl_q3 = 0;
  std::optional<std::string> class_label;

  std::array<double, 10> as_array() const {
    return {ul_mean, ul_std, ul_slope, ul_q1, ul_q3,
            dl_mean, dl_std, dl_slope, dl_q1, dl_q3};
  }
};

inline constexpr std::array<const char*, 10> kFeatureNames = {
    "ul_mean", "ul_std", "ul_slope", "ul_q1", "ul_q3",
    "dl_mean", "dl_std", "dl_slope", "dl_q1", "dl_q3"};

/// Step CDF sampled at the distinct values of the input.
struct CdfCurve {
  std::vector<double> values;         // sorted, distinct
  std::vector<double> probabilities;  // strictly increasing, ends at 1
};

double mean(std::span<const double> data);
double stddev_pop(std::span<const double> data);

/// Linear-interpolation percentile: index p/100 * (n-1) on the sorted data.
double percentile(std::span<const double> data, double p);

/// Keeps the strictly positive elements, order preserved. Throws data_error
/// when nothing survives.
std::vector<double> remove_zeros(std::span<const double> data);

/// Caps outliers above Q3 + iqr_multiplier * IQR at the cap percentile of
/// the original data. Everything else passes through untouched.
std::vector<double> iqr_cap(std::span<const double> data,
                            const PipelineConfig& cfg);

/// Min-max normalization over a trailing window of window_fraction * length
/// bins (at least min_window). A window with max == min maps to 0.
ThroughputSeries rolling_normalize(const ThroughputSeries& series,
                                   const PipelineConfig& cfg);

/// Ordinary least-squares slope of values against bin index 0..n-1.
double slope(std::span<const double> data);

/// Element-wise mean across iterations, truncated to the shortest trace.
ThroughputSeries average_iterations(std::span<const ThroughputSeries> traces);

/// Cleans each direction (remove_zeros then iqr_cap) and extracts the 10
/// features on the cleaned raw values.
FeatureVector extract_features(const ThroughputSeries& ul,
                               const ThroughputSeries& dl,
                               const PipelineConfig& cfg);

CdfCurve empirical_cdf(std::span<const double> data);

/// Pearson r; throws data_error for constant input or mismatched lengths.
double pearson_correlation(std::span<const double> a,
                           std::span<const double> b);

}  // namespace rrb
