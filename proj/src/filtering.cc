#include "capdetail/filtering.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "capdetail/random.h"
#include "capdetail/text.h"

namespace capdetail {
namespace {

struct Ranked {
  const Candidate* candidate;
  std::optional<double> score;
};

// Descending score, undefined scores last, ties by ascending id.
void RankInPlace(std::vector<Ranked>& ranked) {
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score.has_value() != b.score.has_value()) return a.score.has_value();
    if (a.score && *a.score != *b.score) return *a.score > *b.score;
    return a.candidate->record_id < b.candidate->record_id;
  });
}

template <typename ScoreFn>
std::vector<const Candidate*> TopN(std::span<const Candidate* const> pool,
                                   std::size_t n, ScoreFn score) {
  std::vector<Ranked> ranked;
  ranked.reserve(pool.size());
  for (const Candidate* c : pool) ranked.push_back({c, score(*c)});
  RankInPlace(ranked);
  std::vector<const Candidate*> top;
  for (std::size_t i = 0; i < n && i < ranked.size(); ++i) {
    top.push_back(ranked[i].candidate);
  }
  return top;
}

void RequireItm(std::span<const Candidate* const> pool) {
  for (const Candidate* c : pool) {
    if (!c->itm) {
      throw Error(ErrorCode::kMissingItmScore,
                  "record '" + c->record_id + "' has no ITM score");
    }
    if (std::isnan(*c->itm)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "record '" + c->record_id + "' has a NaN ITM score");
    }
  }
}

void RequireReports(std::span<const Candidate* const> pool) {
  for (const Candidate* c : pool) {
    if (!c->report) {
      throw Error(ErrorCode::kMissingMetricReport,
                  "record '" + c->record_id + "' has no metric report");
    }
  }
}

std::optional<double> CompositeScore(const Candidate& c,
                                      const RankingKey& key) {
  if (!key.icr && !key.aod) return c.itm;
  double value = 1.0;
  if (key.icr) value *= c.report->icr;
  if (key.aod) value *= c.report->aod;
  if (key.length_normalize) {
    if (c.report->length == 0) return std::nullopt;
    value /= static_cast<double>(c.report->length);
  }
  return value;
}

std::optional<double> ItmScore(const Candidate& c) { return c.itm; }

std::optional<double> LengthScore(const Candidate& c) {
  return static_cast<double>(c.caption_length);
}

}  // namespace

std::string_view StrategyName(Strategy strategy) {
  switch (strategy) {
    case Strategy::kFull: return "full";
    case Strategy::kRandom: return "random";
    case Strategy::kLength: return "length";
    case Strategy::kItmLength: return "itm_length";
    case Strategy::kDetailness: return "detailness";
    case Strategy::kComposite: return "composite";
  }
  return "unknown";
}

std::optional<Strategy> ParseStrategy(std::string_view name) {
  for (Strategy s : {Strategy::kFull, Strategy::kRandom, Strategy::kLength,
                     Strategy::kItmLength, Strategy::kDetailness,
                     Strategy::kComposite}) {
    if (StrategyName(s) == name) return s;
  }
  return std::nullopt;
}

std::string RankingKeyName(const RankingKey& key) {
  std::string name;
  const auto add = [&name](bool on, const char* part) {
    if (!on) return;
    if (!name.empty()) name.push_back('+');
    name += part;
  };
  add(key.itm_prefilter, "itm");
  add(key.icr, "icr");
  add(key.aod, "aod");
  add(key.length_normalize, "len");
  return name;
}

RankingKey ParseRankingKey(std::string_view text) {
  RankingKey key{false, false, false, false};
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('+', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view part = text.substr(pos, end - pos);
    if (part == "itm") {
      key.itm_prefilter = true;
    } else if (part == "icr") {
      key.icr = true;
    } else if (part == "aod") {
      key.aod = true;
    } else if (part == "len" || part == "length") {
      key.length_normalize = true;
    } else {
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown ranking key part '" + std::string(part) + "'");
    }
    pos = end + 1;
  }
  if (!key.itm_prefilter && !key.icr && !key.aod) {
    throw Error(ErrorCode::kInvalidArgument,
                "ranking key needs at least one of itm, icr, aod");
  }
  return key;
}

SelectionManifest Select(std::span<const Candidate> candidates,
                         const SelectionSpec& spec) {
  std::vector<const Candidate*> pool;
  pool.reserve(candidates.size());
  for (const Candidate& c : candidates) pool.push_back(&c);
  std::sort(pool.begin(), pool.end(),
            [](const Candidate* a, const Candidate* b) {
              return a->record_id < b->record_id;
            });
  for (std::size_t i = 1; i < pool.size(); ++i) {
    if (pool[i]->record_id == pool[i - 1]->record_id) {
      throw Error(ErrorCode::kDuplicateId,
                  "record '" + pool[i]->record_id + "' listed twice");
    }
  }

  const std::size_t n = pool.size();
  const bool two_stage =
      spec.strategy == Strategy::kItmLength ||
      spec.strategy == Strategy::kDetailness ||
      (spec.strategy == Strategy::kComposite && spec.key.itm_prefilter);
  if (spec.strategy != Strategy::kFull) {
    if (spec.t == 0) throw Error(ErrorCode::kInvalidArgument, "T must be > 0");
    if (two_stage) {
      if (spec.k == 0) {
        throw Error(ErrorCode::kInvalidArgument, "K must be > 0");
      }
      if (spec.k > n) {
        throw Error(ErrorCode::kKTooLarge,
                    "K=" + std::to_string(spec.k) + " exceeds " +
                        std::to_string(n) + " records");
      }
      if (spec.t > spec.k) {
        throw Error(ErrorCode::kTTooLarge,
                    "T=" + std::to_string(spec.t) + " exceeds K=" +
                        std::to_string(spec.k));
      }
    }
    if (spec.t > n) {
      throw Error(ErrorCode::kTTooLarge,
                  "T=" + std::to_string(spec.t) + " exceeds " +
                      std::to_string(n) + " records");
    }
  }

  std::vector<const Candidate*> chosen;
  switch (spec.strategy) {
    case Strategy::kFull:
      chosen = pool;
      break;
    case Strategy::kRandom: {
      Rng rng(spec.seed);
      for (std::size_t i = 0; i < spec.t; ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(rng.UniformBelow(n - i));
        std::swap(pool[i], pool[j]);
      }
      chosen.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(spec.t));
      break;
    }
    case Strategy::kLength:
      chosen = TopN(pool, spec.t, LengthScore);
      break;
    case Strategy::kItmLength: {
      RequireItm(pool);
      const auto pruned = TopN(pool, spec.k, ItmScore);
      chosen = TopN(pruned, spec.t, LengthScore);
      break;
    }
    case Strategy::kDetailness: {
      RequireItm(pool);
      RequireReports(pool);
      const auto pruned = TopN(pool, spec.k, ItmScore);
      chosen = TopN(pruned, spec.t, [](const Candidate& c) {
        return c.report->detailness;
      });
      break;
    }
    case Strategy::kComposite: {
      const RankingKey& key = spec.key;
      const bool needs_itm = key.itm_prefilter || (!key.icr && !key.aod);
      if (needs_itm) RequireItm(pool);
      if (key.icr || key.aod) RequireReports(pool);
      const auto score = [&key](const Candidate& c) {
        return CompositeScore(c, key);
      };
      if (key.itm_prefilter) {
        chosen = TopN(TopN(pool, spec.k, ItmScore), spec.t, score);
      } else {
        chosen = TopN(pool, spec.t, score);
      }
      break;
    }
  }

  SelectionManifest manifest;
  manifest.spec = spec;
  manifest.record_ids.reserve(chosen.size());
  for (const Candidate* c : chosen) manifest.record_ids.push_back(c->record_id);
  return manifest;
}

SelectionSummary Summarize(std::span<const std::string> record_ids,
                           std::span<const MetricReport> reports) {
  std::unordered_map<std::string_view, const MetricReport*> by_id;
  by_id.reserve(reports.size());
  for (const MetricReport& r : reports) by_id.emplace(r.record_id, &r);
  SelectionSummary summary;
  summary.count = record_ids.size();
  if (record_ids.empty()) return summary;
  double icr = 0.0;
  double aod = 0.0;
  double length = 0.0;
  for (const std::string& id : record_ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kMissingMetricReport,
                  "record '" + id + "' has no metric report");
    }
    icr += it->second->icr;
    aod += it->second->aod;
    length += static_cast<double>(it->second->length);
  }
  const double count = static_cast<double>(record_ids.size());
  summary.avg_icr_percent = 100.0 * icr / count;
  summary.avg_aod = aod / count;
  summary.avg_length = length / count;
  return summary;
}

std::string SerializeSelectionManifest(const SelectionManifest& manifest) {
  const SelectionSpec& spec = manifest.spec;
  std::string out = "# capdetail selection manifest v1\n";
  const auto field = [&out](std::string_view name, const std::string& value) {
    out += "# ";
    out += name;
    out += ": ";
    out += value;
    out.push_back('\n');
  };
  field("strategy", std::string(StrategyName(spec.strategy)));
  if (spec.strategy == Strategy::kComposite) {
    field("key", RankingKeyName(spec.key));
  }
  field("k", std::to_string(spec.k));
  field("t", std::to_string(spec.t));
  field("seed", std::to_string(spec.seed));
  field("count", std::to_string(manifest.record_ids.size()));
  if (manifest.summary) {
    field("avg_icr", FormatDouble(manifest.summary->avg_icr_percent));
    field("avg_aod", FormatDouble(manifest.summary->avg_aod));
    field("avg_length", FormatDouble(manifest.summary->avg_length));
  }
  out += "---\n";
  for (const std::string& id : manifest.record_ids) {
    out += id;
    out.push_back('\n');
  }
  return out;
}

SelectionManifest ParseSelectionManifest(std::string_view text) {
  SelectionManifest manifest;
  std::map<std::string, std::string> header;
  bool in_body = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (in_body) {
      if (!line.empty()) manifest.record_ids.emplace_back(line);
      continue;
    }
    if (line == "---") {
      in_body = true;
      continue;
    }
    if (line.size() < 2 || line.substr(0, 2) != "# ") {
      throw Error(ErrorCode::kMalformedDocument,
                  "unexpected manifest header line '" + std::string(line) +
                      "'");
    }
    const std::size_t colon = line.find(": ");
    if (colon == std::string_view::npos) continue;  // title line
    header[std::string(line.substr(2, colon - 2))] =
        std::string(line.substr(colon + 2));
  }
  if (!in_body) {
    throw Error(ErrorCode::kMalformedDocument, "manifest has no '---' line");
  }
  try {
    const auto strategy = ParseStrategy(header.at("strategy"));
    if (!strategy) {
      throw Error(ErrorCode::kMalformedDocument, "unknown strategy");
    }
    manifest.spec.strategy = *strategy;
    if (header.count("key")) manifest.spec.key = ParseRankingKey(header["key"]);
    manifest.spec.k = std::stoull(header.at("k"));
    manifest.spec.t = std::stoull(header.at("t"));
    manifest.spec.seed = std::stoull(header.at("seed"));
    if (header.count("avg_icr")) {
      manifest.summary = SelectionSummary{
          manifest.record_ids.size(), std::stod(header.at("avg_icr")),
          std::stod(header.at("avg_aod")), std::stod(header.at("avg_length"))};
    }
  } catch (const std::out_of_range& e) {
    throw Error(ErrorCode::kMalformedDocument,
                std::string("manifest header incomplete: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::kMalformedDocument,
                std::string("manifest header value: ") + e.what());
  }
  return manifest;
}

}  // namespace capdetail
