#include "capdetail/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "capdetail/text.h"

namespace capdetail {

double Pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(xs.size()) + " vs " + std::to_string(ys.size()));
  }
  if (xs.size() < 2) {
    throw Error(ErrorCode::kLengthMismatch, "need at least two points");
  }
  const double n = static_cast<double>(xs.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mean_x;
    const double dy = ys[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::kZeroVariance,
                sxx == 0.0 ? "first series is constant"
                           : "second series is constant");
  }
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

BinnedCurve BinnedMean(std::span<const double> metric_values,
                       std::span<const double> itm_values,
                       std::size_t n_bins) {
  if (metric_values.size() != itm_values.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(metric_values.size()) + " metric values vs " +
                    std::to_string(itm_values.size()) + " ITM scores");
  }
  if (metric_values.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no values to bin");
  }
  if (n_bins == 0) {
    throw Error(ErrorCode::kInvalidArgument, "bin count must be >= 1");
  }
  for (std::size_t i = 0; i < metric_values.size(); ++i) {
    if (!std::isfinite(metric_values[i]) || !std::isfinite(itm_values[i])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "non-finite value at index " + std::to_string(i));
    }
  }
  const auto [lo_it, hi_it] =
      std::minmax_element(metric_values.begin(), metric_values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (hi == lo) n_bins = 1;

  BinnedCurve curve;
  curve.bin_edges.resize(n_bins + 1);
  const double width = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t b = 0; b <= n_bins; ++b) {
    curve.bin_edges[b] = lo + width * static_cast<double>(b);
  }
  curve.bin_edges.back() = hi;

  std::vector<double> sums(n_bins, 0.0);
  curve.bin_counts.assign(n_bins, 0);
  for (std::size_t i = 0; i < metric_values.size(); ++i) {
    std::size_t bin = 0;
    if (hi > lo) {
      const double pos = (metric_values[i] - lo) / (hi - lo) *
                         static_cast<double>(n_bins);
      bin = std::min(static_cast<std::size_t>(pos), n_bins - 1);
    }
    sums[bin] += itm_values[i];
    ++curve.bin_counts[bin];
  }
  curve.bin_means.resize(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (curve.bin_counts[b] > 0) {
      curve.bin_means[b] = sums[b] / static_cast<double>(curve.bin_counts[b]);
    }
  }
  return curve;
}

std::map<std::string, DimensionCorrelation> CorrelationTable(
    std::span<const RatioRow> rows) {
  if (rows.size() < 2) {
    throw Error(ErrorCode::kTooFewRatios,
                "need at least two ratios, got " + std::to_string(rows.size()));
  }
  std::set<std::string> dims;
  for (const auto& [name, score] : rows.front().scores) dims.insert(name);
  for (const RatioRow& row : rows) {
    std::set<std::string> row_dims;
    for (const auto& [name, score] : row.scores) row_dims.insert(name);
    if (row_dims != dims) {
      throw Error(ErrorCode::kInconsistentDimensions,
                  "row at ratio " + FormatDouble(row.ratio) +
                      " has a different set of dimensions");
    }
  }
  std::vector<double> ratios;
  for (const RatioRow& row : rows) ratios.push_back(row.ratio);

  std::map<std::string, DimensionCorrelation> table;
  for (const std::string& dim : dims) {
    std::vector<double> scores;
    for (const RatioRow& row : rows) scores.push_back(row.scores.at(dim));
    DimensionCorrelation entry;
    try {
      entry.r = Pearson(ratios, scores);
    } catch (const Error& e) {
      entry.error = e.code();
    }
    table.emplace(dim, entry);
  }
  return table;
}

std::map<std::string, std::vector<RatioRow>> ParseRatioTable(
    std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::kMalformedDocument,
                "ratio table must map group names to row arrays");
  }
  std::map<std::string, std::vector<RatioRow>> groups;
  for (const auto& [group, rows] : doc.items()) {
    if (!rows.is_array()) {
      throw Error(ErrorCode::kMalformedDocument,
                  "group '" + group + "' is not an array");
    }
    auto& out = groups[group];
    for (const auto& row : rows) {
      RatioRow parsed;
      if (!row.is_object() || !row.contains("ratio") ||
          !row["ratio"].is_number()) {
        throw Error(ErrorCode::kMalformedDocument,
                    "row in group '" + group + "' needs a numeric 'ratio'");
      }
      for (const auto& [key, value] : row.items()) {
        if (!value.is_number()) {
          throw Error(ErrorCode::kMalformedDocument,
                      "non-numeric '" + key + "' in group '" + group + "'");
        }
        if (key == "ratio") {
          parsed.ratio = value.get<double>();
        } else {
          parsed.scores[key] = value.get<double>();
        }
      }
      out.push_back(std::move(parsed));
    }
  }
  return groups;
}

nlohmann::ordered_json BinnedCurveToJson(const BinnedCurve& curve) {
  nlohmann::ordered_json doc;
  doc["bin_edges"] = curve.bin_edges;
  doc["bin_means"] = nlohmann::ordered_json::array();
  for (const auto& mean : curve.bin_means) {
    doc["bin_means"].push_back(mean ? nlohmann::ordered_json(*mean)
                                    : nlohmann::ordered_json(nullptr));
  }
  doc["bin_counts"] = curve.bin_counts;
  return doc;
}

std::string FormatBinnedCurve(std::string_view metric_name,
                              const BinnedCurve& curve) {
  std::vector<std::string> ranges;
  std::size_t width = metric_name.size() + 4;
  for (std::size_t b = 0; b < curve.bin_counts.size(); ++b) {
    ranges.push_back("[" + FormatDouble(curve.bin_edges[b]) + ", " +
                     FormatDouble(curve.bin_edges[b + 1]) +
                     (b + 1 == curve.bin_counts.size() ? "]" : ")"));
    width = std::max(width, ranges.back().size());
  }
  const int w = static_cast<int>(width);
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-*s %8s  %s\n", w,
                (std::string(metric_name) + " bin").c_str(), "count",
                "mean_itm");
  out += line;
  for (std::size_t b = 0; b < ranges.size(); ++b) {
    const std::string mean =
        curve.bin_means[b] ? FormatDouble(*curve.bin_means[b]) : "-";
    std::snprintf(line, sizeof(line), "%-*s %8zu  %s\n", w, ranges[b].c_str(),
                  curve.bin_counts[b], mean.c_str());
    out += line;
  }
  return out;
}

}  // namespace capdetail
