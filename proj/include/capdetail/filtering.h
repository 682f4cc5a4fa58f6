#ifndef CAPDETAIL_FILTERING_H_
#define CAPDETAIL_FILTERING_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "capdetail/metrics.h"

namespace capdetail {

// ITM pre-filter size and final subset size used for the reference
// curation run.
inline constexpr std::size_t kDefaultPrefilterSize = 30000;
inline constexpr std::size_t kDefaultSelectionSize = 20000;

enum class Strategy {
  kFull,        // every record
  kRandom,      // T uniformly at random
  kLength,      // T longest captions
  kItmLength,   // top K by ITM, then T longest
  kDetailness,  // top K by ITM, then T by caption detailness
  kComposite,   // ablation: configurable RankingKey
};

std::string_view StrategyName(Strategy strategy);
std::optional<Strategy> ParseStrategy(std::string_view name);

// Second-stage key for kComposite: the product of the enabled metrics,
// optionally divided by caption length, after an optional ITM top-K stage.
// With neither icr nor aod enabled the key is the ITM score itself.
// {itm, icr, aod, length} reproduces kDetailness.
struct RankingKey {
  bool itm_prefilter = true;
  bool icr = true;
  bool aod = true;
  bool length_normalize = true;

  bool operator==(const RankingKey&) const = default;
};

// Text form: '+'-joined subset of {itm, icr, aod, len}, e.g. "itm+icr".
std::string RankingKeyName(const RankingKey& key);
RankingKey ParseRankingKey(std::string_view text);

struct SelectionSpec {
  Strategy strategy = Strategy::kDetailness;
  std::size_t k = kDefaultPrefilterSize;
  std::size_t t = kDefaultSelectionSize;
  std::uint64_t seed = 0;
  RankingKey key;

  bool operator==(const SelectionSpec&) const = default;
};

// One selectable record. caption_length is the word count of the record's
// caption; report and itm are required only by strategies that rank on them.
struct Candidate {
  std::string record_id;
  std::size_t caption_length = 0;
  std::optional<double> itm;
  std::optional<MetricReport> report;
};

struct SelectionSummary {
  std::size_t count = 0;
  double avg_icr_percent = 0.0;
  double avg_aod = 0.0;
  double avg_length = 0.0;

  bool operator==(const SelectionSummary&) const = default;
};

struct SelectionManifest {
  std::vector<std::string> record_ids;  // best first
  SelectionSpec spec;
  std::optional<SelectionSummary> summary;

  bool operator==(const SelectionManifest&) const = default;
};

// Runs the strategy. Every ranking breaks ties by ascending record id and
// records without a defined score rank last, so the result does not depend
// on input order. Throws kMissingItmScore, kMissingMetricReport,
// kTTooLarge, kKTooLarge and kDuplicateId.
SelectionManifest Select(std::span<const Candidate> candidates,
                         const SelectionSpec& spec);

// Means over the selected records; ICR is reported in percent.
// Throws kMissingMetricReport.
SelectionSummary Summarize(std::span<const std::string> record_ids,
                           std::span<const MetricReport> reports);

// Header lines "# name: value" echoing the selection parameters and summary, a "---"
// separator, then one record id per line.
std::string SerializeSelectionManifest(const SelectionManifest& manifest);
SelectionManifest ParseSelectionManifest(std::string_view text);

}  // namespace capdetail

#endif  // CAPDETAIL_FILTERING_H_
