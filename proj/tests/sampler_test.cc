#include "capdetail/sampler.h"

#include <gtest/gtest.h>

#include <cmath>

#include "capdetail/errors.h"
#include "capdetail/metrics.h"
#include "capdetail/random.h"
#include "support/fixtures.h"
#include "support/template_grammar.h"

namespace capdetail {
namespace {

using ::capdetail::testing::ParseTemplateCaption;
using ::capdetail::testing::RandomDisjointFixture;
using ::capdetail::testing::RandomSceneGraph;
using ::capdetail::testing::RectMask;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

SamplingTarget Icr(double ratio, std::uint64_t seed = 1) {
  return {SamplingDimension::kIcr, ratio, 0.05, seed, kDefaultMaxRestarts};
}
SamplingTarget Aod(double ratio, std::uint64_t seed = 1) {
  return {SamplingDimension::kAod, ratio, 0.05, seed, kDefaultMaxRestarts};
}

// Four 4x4 column stripes of a 4x16 image.
struct FourStripes {
  SceneGraph graph = SceneGraph::Create(
      {{"o1", "a"}, {"o2", "b"}, {"o3", "c"}, {"o4", "d"}}, {}, {});
  MaskDocument masks = {{"o1", RectMask(4, 16, 0, 0, 4, 4)},
                        {"o2", RectMask(4, 16, 0, 4, 4, 4)},
                        {"o3", RectMask(4, 16, 0, 8, 4, 4)},
                        {"o4", RectMask(4, 16, 0, 12, 4, 4)}};
};

TEST(SampleIcrTest, FullRatioKeepsEverything) {
  FourStripes f;
  const SampledVariant v = SampleIcrSubgraph(f.graph, f.masks, 4, 16, Icr(1.0));
  EXPECT_EQ(v.subgraph, f.graph);
  EXPECT_DOUBLE_EQ(v.achieved_ratio, 1.0);
}

TEST(SampleIcrTest, HalfOfFourEqualMasks) {
  FourStripes f;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SampledVariant v =
        SampleIcrSubgraph(f.graph, f.masks, 4, 16, Icr(0.5, seed));
    EXPECT_EQ(v.subgraph.objects().size(), 2u);
    EXPECT_DOUBLE_EQ(v.achieved_ratio, 0.5);
  }
}

TEST(SampleIcrTest, DominantMaskIsUnreachable) {
  const SceneGraph g = SceneGraph::Create({{"o1", "sky"}, {"o2", "bird"}}, {}, {});
  const MaskDocument masks = {{"o1", RectMask(4, 4, 0, 0, 4, 4)},
                              {"o2", RectMask(4, 4, 0, 0, 1, 1)}};
  EXPECT_FALSE(ExhaustiveIcrSearch(g, masks, 4, 4, Icr(0.2)).has_value());
  EXPECT_EQ(CodeOf([&] { SampleIcrSubgraph(g, masks, 4, 4, Icr(0.2)); }),
            ErrorCode::kUnreachable);
}

TEST(SampleIcrTest, ZeroCoverageGraph) {
  const SceneGraph g = SceneGraph::Create({{"o1", "ghost"}}, {}, {});
  EXPECT_EQ(CodeOf([&] { SampleIcrSubgraph(g, {}, 4, 4, Icr(0.5)); }),
            ErrorCode::kZeroOriginalIcr);
}

TEST(SampleIcrTest, RejectsBadTargets) {
  FourStripes f;
  for (double ratio : {0.0, -0.1, 1.5}) {
    EXPECT_EQ(CodeOf([&] { SampleIcrSubgraph(f.graph, f.masks, 4, 16, Icr(ratio)); }),
              ErrorCode::kInvalidArgument);
  }
  EXPECT_EQ(CodeOf([&] { SampleIcrSubgraph(f.graph, f.masks, 4, 16, Aod(0.5)); }),
            ErrorCode::kInvalidArgument);
}

TEST(SampleIcrTest, DeterministicPerSeed) {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = RandomDisjointFixture(rng, 10);
    const auto target = Icr(0.6, trial);
    try {
      const auto a = SampleIcrSubgraph(f.graph, f.masks, f.height, f.width, target);
      const auto b = SampleIcrSubgraph(f.graph, f.masks, f.height, f.width, target);
      EXPECT_EQ(SerializeSceneGraph(a.subgraph), SerializeSceneGraph(b.subgraph));
      EXPECT_EQ(a.realized_caption, b.realized_caption);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kUnreachable);
    }
  }
}

TEST(SampleIcrPropertyTest, AcceptedResultsAreWithinToleranceAndInduced) {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = RandomDisjointFixture(rng, 10);
    for (double ratio : kDefaultSamplingRatios) {
      const auto target = Icr(ratio, trial);
      const bool feasible =
          ExhaustiveIcrSearch(f.graph, f.masks, f.height, f.width, target)
              .has_value();
      try {
        const auto v = SampleIcrSubgraph(f.graph, f.masks, f.height, f.width, target);
        EXPECT_TRUE(feasible);
        EXPECT_LE(std::abs(v.achieved_ratio - ratio), 0.05 + 1e-12);
        std::set<std::string> ids;
        for (const auto& o : v.subgraph.objects()) ids.insert(o.id);
        EXPECT_EQ(v.subgraph, InducedSubgraph(f.graph, ids));
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kUnreachable);
        EXPECT_FALSE(feasible);
      }
    }
  }
}

TEST(ExhaustiveIcrSearchTest, RefusesLargeGraphs) {
  std::vector<ObjectRef> objects;
  MaskDocument masks;
  for (int i = 0; i < 13; ++i) {
    const std::string id = "o" + std::to_string(100 + i);
    objects.push_back({id, "x"});
    masks[id] = RectMask(1, 13, 0, i, 1, 1);
  }
  const SceneGraph g = SceneGraph::Create(objects, {}, {});
  EXPECT_EQ(CodeOf([&] { ExhaustiveIcrSearch(g, masks, 1, 13, Icr(0.5)); }),
            ErrorCode::kInvalidArgument);
}

SceneGraph TenEdges() {
  std::vector<AttributePair> attributes;
  for (int i = 0; i < 6; ++i) attributes.push_back({"o1", "attr" + std::to_string(i)});
  return SceneGraph::Create({{"o1", "box"}, {"o2", "cat"}}, attributes,
                            {{"o1", "near", "o2"},
                             {"o1", "under", "o2"},
                             {"o2", "on", "o1"},
                             {"o2", "beside", "o1"}});
}

TEST(SampleAodTest, FullRatioKeepsEverything) {
  const SceneGraph g = TenEdges();
  const SampledVariant v = SampleAodSubgraph(g, Aod(1.0));
  EXPECT_EQ(v.subgraph, g);
  EXPECT_DOUBLE_EQ(v.achieved_ratio, 1.0);
}

TEST(SampleAodTest, KeepsFourOfTenEdges) {
  const SceneGraph g = TenEdges();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SampledVariant v = SampleAodSubgraph(g, Aod(0.4, seed));
    EXPECT_EQ(v.subgraph.edge_count(), 4u);
    EXPECT_DOUBLE_EQ(v.achieved_ratio, 0.4);
    EXPECT_EQ(v.subgraph.objects(), g.objects());
  }
}

TEST(SampleAodTest, SingleEdgeIsUnreachable) {
  const SceneGraph g = SceneGraph::Create({{"o1", "box"}}, {{"o1", "red"}}, {});
  EXPECT_EQ(CodeOf([&] { SampleAodSubgraph(g, Aod(0.4)); }),
            ErrorCode::kUnreachable);
}

TEST(SampleAodTest, NoEdges) {
  const SceneGraph g = SceneGraph::Create({{"o1", "box"}}, {}, {});
  EXPECT_EQ(CodeOf([&] { SampleAodSubgraph(g, Aod(0.4)); }),
            ErrorCode::kZeroOriginalAod);
}

TEST(SampleAodPropertyTest, EdgesAreASubsetAndDeterministic) {
  Rng rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const SceneGraph g = RandomSceneGraph(rng, 8, 30);
    if (g.edge_count() == 0) continue;
    const auto target = Aod(0.6, trial);
    try {
      const auto v = SampleAodSubgraph(g, target);
      const auto again = SampleAodSubgraph(g, target);
      EXPECT_EQ(SerializeSceneGraph(v.subgraph), SerializeSceneGraph(again.subgraph));
      EXPECT_LE(std::abs(v.achieved_ratio - 0.6), 0.05 + 1e-12);
      EXPECT_EQ(v.subgraph.edge_count(),
                static_cast<std::size_t>(std::llround(0.6 * g.edge_count())));
      for (const auto& a : v.subgraph.attributes()) {
        EXPECT_NE(std::find(g.attributes().begin(), g.attributes().end(), a),
                  g.attributes().end());
      }
      for (const auto& r : v.subgraph.relations()) {
        EXPECT_NE(std::find(g.relations().begin(), g.relations().end(), r),
                  g.relations().end());
      }
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kUnreachable);
    }
  }
}

TEST(RealizeCaptionTest, Examples) {
  EXPECT_EQ(RealizeCaption(SceneGraph()), "");
  EXPECT_EQ(RealizeCaption(SceneGraph::Create({{"o1", "car"}}, {{"o1", "red"}}, {})),
            "There is a red car.");
  EXPECT_EQ(RealizeCaption(SceneGraph::Create({{"o1", "car"}, {"o2", "tree"}}, {},
                                              {{"o1", "near", "o2"}})),
            "There is a car. There is a tree. The car is near the tree.");
  EXPECT_EQ(RealizeCaption(SceneGraph::Create({{"o1", "apple"}}, {}, {})),
            "There is an apple.");
}

TEST(RealizeCaptionPropertyTest, TemplateGrammarRoundTrip) {
  Rng rng(44);
  for (int trial = 0; trial < 200; ++trial) {
    const SceneGraph g = RandomSceneGraph(rng, 6, 12);
    // The grammar resolves relations by label, so keep labels unique.
    std::set<std::string> labels;
    bool unique = true;
    for (const auto& o : g.objects()) unique &= labels.insert(o.label).second;
    if (!unique) continue;
    const SceneGraph parsed = ParseTemplateCaption(RealizeCaption(g));
    EXPECT_EQ(parsed.objects().size(), g.objects().size());
    EXPECT_EQ(parsed.attributes().size(), g.attributes().size());
    EXPECT_EQ(parsed.relations().size(), g.relations().size());
    EXPECT_EQ(RealizeCaption(parsed), RealizeCaption(g));
  }
}

TEST(SamplingSpecTest, DefaultsAndParsing) {
  const auto defaults = DefaultSamplingTargets(9);
  ASSERT_EQ(defaults.size(), 8u);
  EXPECT_EQ(defaults[0].dimension, SamplingDimension::kIcr);
  EXPECT_EQ(defaults[7].dimension, SamplingDimension::kAod);
  EXPECT_DOUBLE_EQ(defaults[3].ratio, 0.8);
  EXPECT_DOUBLE_EQ(defaults[0].tolerance, 0.05);

  const auto parsed = ParseSamplingSpec(
      R"([{"dimension":"icr","ratio":0.2},{"dimension":"aod","ratio":0.6,"tolerance":0.1,"seed":5}])",
      3);
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_EQ(parsed[0].seed, 3u);
  EXPECT_EQ(parsed[1].seed, 5u);
  EXPECT_DOUBLE_EQ(parsed[1].tolerance, 0.1);
  EXPECT_THROW(ParseSamplingSpec(R"([{"dimension":"length","ratio":0.2}])", 0), Error);
  EXPECT_THROW(ParseSamplingSpec(R"({})", 0), Error);
}

}  // namespace
}  // namespace capdetail
