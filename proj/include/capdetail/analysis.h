#ifndef CAPDETAIL_ANALYSIS_H_
#define CAPDETAIL_ANALYSIS_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "capdetail/errors.h"
#include "json.hpp"

namespace capdetail {

inline constexpr std::size_t kDefaultBinCount = 10;

// Product-moment correlation, two-pass. Throws kLengthMismatch (also for
// fewer than two points) and kZeroVariance.
double Pearson(std::span<const double> xs, std::span<const double> ys);

// Mean ITM score per equal-width metric bin over [min, max], last bin closed
// on the right. A constant metric collapses to one bin.
struct BinnedCurve {
  std::vector<double> bin_edges;                // size n_bins + 1
  std::vector<std::optional<double>> bin_means;  // nullopt marks empty bins
  std::vector<std::size_t> bin_counts;
};

// Throws kLengthMismatch, kEmptyInput and kInvalidArgument (n_bins == 0 or
// non-finite values).
BinnedCurve BinnedMean(std::span<const double> metric_values,
                       std::span<const double> itm_values, std::size_t n_bins);

// Scores of one sampling ratio, e.g. one row of a per-category benchmark
// table.
struct RatioRow {
  double ratio = 0.0;
  std::map<std::string, double> scores;
};

// Correlation of ratio vs. score for one dimension, or the error that
// prevented it.
struct DimensionCorrelation {
  std::optional<double> r;
  std::optional<ErrorCode> error;
};

// One Pearson r per score dimension. Throws kTooFewRatios and
// kInconsistentDimensions; per-dimension failures such as kZeroVariance are
// reported in the result.
std::map<std::string, DimensionCorrelation> CorrelationTable(
    std::span<const RatioRow> rows);

// {"<group>": [{"ratio": r, "<dimension>": score, ...}, ...]} per group, e.g.
// "icr" and "aod".
std::map<std::string, std::vector<RatioRow>> ParseRatioTable(
    std::string_view document);

nlohmann::ordered_json BinnedCurveToJson(const BinnedCurve& curve);

// Fixed-width text table of a binned curve.
std::string FormatBinnedCurve(std::string_view metric_name,
                              const BinnedCurve& curve);

}  // namespace capdetail

#endif  // CAPDETAIL_ANALYSIS_H_
