#ifndef CAPDETAIL_SAMPLER_H_
#define CAPDETAIL_SAMPLER_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "capdetail/masks.h"
#include "capdetail/scene_graph.h"

namespace capdetail {

enum class SamplingDimension { kIcr, kAod };

std::string_view SamplingDimensionName(SamplingDimension dimension);

inline constexpr std::array<double, 4> kDefaultSamplingRatios = {0.2, 0.4,
                                                                 0.6, 0.8};
inline constexpr double kDefaultSamplingTolerance = 0.05;
inline constexpr int kDefaultMaxRestarts = 64;
// Graphs with at most this many objects get an exhaustive subset search when
// the randomized search fails.
inline constexpr std::size_t kExhaustiveSearchMaxObjects = 12;

// Desired metric value of a sub-graph relative to the original graph.
// tolerance is an absolute deviation on the ratio: 0.2 +- 0.05 accepts
// [0.15, 0.25].
struct SamplingTarget {
  SamplingDimension dimension = SamplingDimension::kIcr;
  double ratio = 1.0;
  double tolerance = kDefaultSamplingTolerance;
  std::uint64_t seed = 0;
  int max_restarts = kDefaultMaxRestarts;

  // Throws kInvalidArgument unless 0 < ratio <= 1, tolerance >= 0 and
  // max_restarts >= 1.
  void Validate() const;
  bool Accepts(double achieved_ratio) const;
};

// ICR and AOD targets at every default ratio.
std::vector<SamplingTarget> DefaultSamplingTargets(std::uint64_t seed);

struct SampledVariant {
  SceneGraph subgraph;
  double achieved_ratio = 0.0;
  std::string realized_caption;
};

// Object subset whose coverage ratio hits the target, searched by seeded
// shuffles with greedy insertion, then exhaustively for small graphs.
// Relations survive only when both endpoints are kept. Throws
// kZeroOriginalIcr and kUnreachable.
SampledVariant SampleIcrSubgraph(const SceneGraph& graph,
                                 const MaskDocument& masks,
                                 std::uint32_t image_height,
                                 std::uint32_t image_width,
                                 const SamplingTarget& target);

// Keeps every object and a uniform sample of round(ratio * edges) of the
// pooled attribute and relation edges. Throws kZeroOriginalAod and
// kUnreachable.
SampledVariant SampleAodSubgraph(const SceneGraph& graph,
                                 const SamplingTarget& target);

// The two ICR subset searches, exposed for feasibility cross-checks. Both
// return the kept object ids or nullopt when nothing lands in tolerance.
std::optional<std::set<std::string>> RandomizedIcrSearch(
    const SceneGraph& graph, const MaskDocument& masks,
    std::uint32_t image_height, std::uint32_t image_width,
    const SamplingTarget& target);
std::optional<std::set<std::string>> ExhaustiveIcrSearch(
    const SceneGraph& graph, const MaskDocument& masks,
    std::uint32_t image_height, std::uint32_t image_width,
    const SamplingTarget& target);

// Template caption: objects by id, "There is a/an <attributes> <label>.",
// then relations, "The <subject> is <predicate> the <object>.".
std::string RealizeCaption(const SceneGraph& graph);

// Sampling spec file: JSON array of {dimension: "icr"|"aod", ratio,
// tolerance?, seed?, max_restarts?}. Missing seeds take default_seed.
std::vector<SamplingTarget> ParseSamplingSpec(std::string_view document,
                                              std::uint64_t default_seed);

}  // namespace capdetail

#endif  // CAPDETAIL_SAMPLER_H_
