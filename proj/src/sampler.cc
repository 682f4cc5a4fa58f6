#include "capdetail/sampler.h"

#include <cmath>
#include <limits>

#include "capdetail/errors.h"
#include "capdetail/metrics.h"
#include "capdetail/random.h"

namespace capdetail {
namespace {

// Decimal ratios such as 0.2 + 0.05 are not exact in binary; absorb that.
constexpr double kRatioSlack = 1e-12;

struct IcrProblem {
  std::vector<std::string> ids;                 // graph objects, sorted
  std::vector<std::vector<PixelRun>> runs;      // empty for ungrounded
  std::uint64_t pixel_count = 0;
  std::uint64_t full_union = 0;
};

IcrProblem BuildIcrProblem(const SceneGraph& graph, const MaskDocument& masks,
                           std::uint32_t image_height,
                           std::uint32_t image_width) {
  IcrProblem problem;
  problem.pixel_count = static_cast<std::uint64_t>(image_height) * image_width;
  const auto grounded = GroundedMasks(graph, masks);
  // Validates dimensions as a side effect.
  const double icr = ComputeIcr(image_height, image_width,
                                std::span<const RleMask* const>(grounded));
  if (icr <= 0.0) {
    throw Error(ErrorCode::kZeroOriginalIcr, "graph covers no pixels");
  }
  problem.full_union = UnionArea(std::span<const RleMask* const>(grounded));
  for (const ObjectRef& o : graph.objects()) {
    problem.ids.push_back(o.id);
    const auto it = masks.find(o.id);
    problem.runs.push_back(it == masks.end() ? std::vector<PixelRun>{}
                                             : ForegroundRuns(it->second));
  }
  return problem;
}

double SubsetRatio(const SceneGraph& graph, const MaskDocument& masks,
                   std::uint32_t image_height, std::uint32_t image_width,
                   const std::set<std::string>& kept) {
  const SceneGraph sub = InducedSubgraph(graph, kept);
  const auto all = GroundedMasks(graph, masks);
  const auto some = GroundedMasks(sub, masks);
  return ComputeIcr(image_height, image_width,
                    std::span<const RleMask* const>(some)) /
         ComputeIcr(image_height, image_width,
                    std::span<const RleMask* const>(all));
}

SampledVariant MakeVariant(SceneGraph subgraph, double achieved) {
  SampledVariant variant;
  variant.realized_caption = RealizeCaption(subgraph);
  variant.subgraph = std::move(subgraph);
  variant.achieved_ratio = achieved;
  return variant;
}

}  // namespace

std::string_view SamplingDimensionName(SamplingDimension dimension) {
  return dimension == SamplingDimension::kIcr ? "icr" : "aod";
}

void SamplingTarget::Validate() const {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "sampling ratio must be in (0, 1], got " +
                    std::to_string(ratio));
  }
  if (!(tolerance >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tolerance must be >= 0");
  }
  if (max_restarts < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_restarts must be >= 1");
  }
}

bool SamplingTarget::Accepts(double achieved_ratio) const {
  return std::abs(achieved_ratio - ratio) <= tolerance + kRatioSlack;
}

std::vector<SamplingTarget> DefaultSamplingTargets(std::uint64_t seed) {
  std::vector<SamplingTarget> targets;
  for (SamplingDimension dim :
       {SamplingDimension::kIcr, SamplingDimension::kAod}) {
    for (double ratio : kDefaultSamplingRatios) {
      targets.push_back({dim, ratio, kDefaultSamplingTolerance, seed,
                         kDefaultMaxRestarts});
    }
  }
  return targets;
}

std::optional<std::set<std::string>> RandomizedIcrSearch(
    const SceneGraph& graph, const MaskDocument& masks,
    std::uint32_t image_height, std::uint32_t image_width,
    const SamplingTarget& target) {
  target.Validate();
  const IcrProblem problem =
      BuildIcrProblem(graph, masks, image_height, image_width);
  const double full = static_cast<double>(problem.full_union);
  const double upper = target.ratio + target.tolerance + kRatioSlack;

  Rng rng(target.seed);
  std::vector<std::size_t> order(problem.ids.size());
  std::vector<std::uint8_t> covered(problem.pixel_count);
  for (int attempt = 0; attempt < target.max_restarts; ++attempt) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.Shuffle(std::span<std::size_t>(order));
    std::fill(covered.begin(), covered.end(), std::uint8_t{0});

    std::uint64_t area = 0;
    std::set<std::string> kept;
    for (std::size_t index : order) {
      std::uint64_t gained = 0;
      for (const PixelRun& run : problem.runs[index]) {
        for (std::uint64_t p = run.begin; p < run.end; ++p) {
          gained += covered[p] == 0;
        }
      }
      if (static_cast<double>(area + gained) / full > upper) continue;
      for (const PixelRun& run : problem.runs[index]) {
        std::fill(covered.begin() + static_cast<std::ptrdiff_t>(run.begin),
                  covered.begin() + static_cast<std::ptrdiff_t>(run.end),
                  std::uint8_t{1});
      }
      area += gained;
      kept.insert(problem.ids[index]);
    }
    if (target.Accepts(static_cast<double>(area) / full)) return kept;
  }
  return std::nullopt;
}

std::optional<std::set<std::string>> ExhaustiveIcrSearch(
    const SceneGraph& graph, const MaskDocument& masks,
    std::uint32_t image_height, std::uint32_t image_width,
    const SamplingTarget& target) {
  target.Validate();
  const IcrProblem problem =
      BuildIcrProblem(graph, masks, image_height, image_width);
  const std::size_t n = problem.ids.size();
  if (n > kExhaustiveSearchMaxObjects) {
    throw Error(ErrorCode::kInvalidArgument,
                "exhaustive search limited to " +
                    std::to_string(kExhaustiveSearchMaxObjects) + " objects");
  }
  const double full = static_cast<double>(problem.full_union);

  // Closest to target wins; ties go to the lowest subset bitmask.
  std::optional<std::uint32_t> best;
  double best_gap = std::numeric_limits<double>::infinity();
  std::vector<PixelRun> runs;
  for (std::uint32_t subset = 0; subset < (1u << n); ++subset) {
    runs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (subset & (1u << i)) {
        runs.insert(runs.end(), problem.runs[i].begin(),
                    problem.runs[i].end());
      }
    }
    std::sort(runs.begin(), runs.end(),
              [](const PixelRun& a, const PixelRun& b) {
                return a.begin < b.begin;
              });
    std::uint64_t area = 0;
    std::uint64_t end = 0;
    for (const PixelRun& run : runs) {
      const std::uint64_t begin = std::max(run.begin, end);
      if (run.end > begin) area += run.end - begin;
      end = std::max(end, run.end);
    }
    const double ratio = static_cast<double>(area) / full;
    if (!target.Accepts(ratio)) continue;
    const double gap = std::abs(ratio - target.ratio);
    if (gap < best_gap) {
      best_gap = gap;
      best = subset;
    }
  }
  if (!best) return std::nullopt;
  std::set<std::string> kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (*best & (1u << i)) kept.insert(problem.ids[i]);
  }
  return kept;
}

SampledVariant SampleIcrSubgraph(const SceneGraph& graph,
                                 const MaskDocument& masks,
                                 std::uint32_t image_height,
                                 std::uint32_t image_width,
                                 const SamplingTarget& target) {
  if (target.dimension != SamplingDimension::kIcr) {
    throw Error(ErrorCode::kInvalidArgument, "target is not an ICR target");
  }
  auto kept =
      RandomizedIcrSearch(graph, masks, image_height, image_width, target);
  if (!kept && graph.objects().size() <= kExhaustiveSearchMaxObjects) {
    kept = ExhaustiveIcrSearch(graph, masks, image_height, image_width, target);
  }
  if (!kept) {
    throw Error(ErrorCode::kUnreachable,
                "no object subset within " +
                    std::to_string(target.tolerance) + " of ICR ratio " +
                    std::to_string(target.ratio));
  }
  const double achieved =
      SubsetRatio(graph, masks, image_height, image_width, *kept);
  return MakeVariant(InducedSubgraph(graph, *kept), achieved);
}

SampledVariant SampleAodSubgraph(const SceneGraph& graph,
                                 const SamplingTarget& target) {
  if (target.dimension != SamplingDimension::kAod) {
    throw Error(ErrorCode::kInvalidArgument, "target is not an AOD target");
  }
  target.Validate();
  const std::size_t total = graph.edge_count();
  if (graph.empty() || total == 0) {
    throw Error(ErrorCode::kZeroOriginalAod, "graph has no edges");
  }
  const auto keep_count =
      static_cast<std::size_t>(std::llround(target.ratio * total));
  const double planned =
      static_cast<double>(keep_count) / static_cast<double>(total);
  if (!target.Accepts(planned)) {
    throw Error(ErrorCode::kUnreachable,
                "keeping " + std::to_string(keep_count) + " of " +
                    std::to_string(total) + " edges misses ratio " +
                    std::to_string(target.ratio));
  }

  // Edge index space: attributes first, then relations, canonical order.
  std::vector<std::size_t> pool(total);
  for (std::size_t i = 0; i < total; ++i) pool[i] = i;
  Rng rng(target.seed);
  for (std::size_t i = 0; i < keep_count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(
                                  rng.UniformBelow(total - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(keep_count);
  std::sort(pool.begin(), pool.end());

  const std::size_t n_attr = graph.attributes().size();
  std::vector<AttributePair> attributes;
  std::vector<RelationTriplet> relations;
  for (std::size_t index : pool) {
    if (index < n_attr) {
      attributes.push_back(graph.attributes()[index]);
    } else {
      relations.push_back(graph.relations()[index - n_attr]);
    }
  }
  SceneGraph sub = SceneGraph::Create(graph.objects(), std::move(attributes),
                                      std::move(relations));
  const double achieved = ComputeAod(sub) / ComputeAod(graph);
  return MakeVariant(std::move(sub), achieved);
}

std::string RealizeCaption(const SceneGraph& graph) {
  std::string caption;
  const auto append_sentence = [&caption](const std::string& sentence) {
    if (!caption.empty()) caption.push_back(' ');
    caption += sentence;
  };
  std::size_t attr = 0;
  const auto& attributes = graph.attributes();
  for (const ObjectRef& object : graph.objects()) {
    std::string phrase;
    while (attr < attributes.size() &&
           attributes[attr].object_id < object.id) {
      ++attr;
    }
    for (; attr < attributes.size() && attributes[attr].object_id == object.id;
         ++attr) {
      phrase += attributes[attr].attribute;
      phrase.push_back(' ');
    }
    phrase += object.label;
    const char first = phrase.front();
    const bool vowel = std::string_view("aeiouAEIOU").find(first) !=
                       std::string_view::npos;
    append_sentence(std::string("There is ") + (vowel ? "an " : "a ") +
                    phrase + ".");
  }
  for (const RelationTriplet& r : graph.relations()) {
    append_sentence("The " + graph.FindObject(r.subject_id)->label + " is " +
                    r.predicate + " the " +
                    graph.FindObject(r.object_id)->label + ".");
  }
  return caption;
}

std::vector<SamplingTarget> ParseSamplingSpec(std::string_view document,
                                              std::uint64_t default_seed) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
  if (!doc.is_array()) {
    throw Error(ErrorCode::kMalformedDocument,
                "sampling spec must be an array of targets");
  }
  std::vector<SamplingTarget> targets;
  for (const auto& entry : doc) {
    try {
      SamplingTarget t;
      const auto dim = entry.at("dimension").get<std::string>();
      if (dim == "icr" || dim == "ICR") {
        t.dimension = SamplingDimension::kIcr;
      } else if (dim == "aod" || dim == "AOD") {
        t.dimension = SamplingDimension::kAod;
      } else {
        throw Error(ErrorCode::kMalformedDocument,
                    "unknown sampling dimension '" + dim + "'");
      }
      t.ratio = entry.at("ratio").get<double>();
      t.tolerance = entry.value("tolerance", kDefaultSamplingTolerance);
      t.seed = entry.value("seed", default_seed);
      t.max_restarts = entry.value("max_restarts", kDefaultMaxRestarts);
      t.Validate();
      targets.push_back(t);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedDocument, e.what());
    }
  }
  return targets;
}

}  // namespace capdetail
