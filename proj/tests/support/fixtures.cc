#include "support/fixtures.h"

#include <unistd.h>

#include <cstdio>
#include <cstdlib>

#include "capdetail/metrics.h"

namespace capdetail::testing {

TempDir::TempDir() {
  std::string pattern =
      (std::filesystem::temp_directory_path() / "capdetail-XXXXXX").string();
  if (::mkdtemp(pattern.data()) == nullptr) std::abort();
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::filesystem::path TestDataDir() {
  if (const char* dir = std::getenv("CAPDETAIL_TEST_DATA")) return dir;
  return std::filesystem::path(__FILE__).parent_path().parent_path() / "data";
}

RleMask RectMask(std::uint32_t height, std::uint32_t width, std::uint32_t row0,
                 std::uint32_t col0, std::uint32_t rows, std::uint32_t cols) {
  Bitmap bitmap{height, width,
                std::vector<std::uint8_t>(
                    static_cast<std::size_t>(height) * width)};
  for (std::uint32_t c = col0; c < col0 + cols && c < width; ++c) {
    for (std::uint32_t r = row0; r < row0 + rows && r < height; ++r) {
      bitmap.bits[static_cast<std::size_t>(c) * height + r] = 1;
    }
  }
  return RleEncode(bitmap);
}

Bitmap RandomBitmap(Rng& rng, std::uint32_t height, std::uint32_t width) {
  Bitmap bitmap{height, width,
                std::vector<std::uint8_t>(
                    static_cast<std::size_t>(height) * width)};
  // Mix of sparse, dense and blocky patterns so long runs occur too.
  const std::uint64_t style = rng.UniformBelow(3);
  const double density = rng.UniformUnit();
  std::uint8_t current = 0;
  for (auto& bit : bitmap.bits) {
    if (style == 0) {
      bit = rng.UniformUnit() < density ? 1 : 0;
    } else {
      if (rng.UniformUnit() < (style == 1 ? 0.05 : 0.3)) current ^= 1;
      bit = current;
    }
  }
  return bitmap;
}

std::uint64_t BitmapOrArea(const std::vector<RleMask>& masks) {
  std::vector<std::uint8_t> covered;
  for (const RleMask& m : masks) {
    const Bitmap b = RleDecode(m);
    if (covered.empty()) covered.assign(b.bits.size(), 0);
    for (std::size_t i = 0; i < b.bits.size(); ++i) covered[i] |= b.bits[i];
  }
  std::uint64_t area = 0;
  for (std::uint8_t c : covered) area += c;
  return area;
}

SceneGraph RandomSceneGraph(Rng& rng, std::size_t max_objects,
                            std::size_t max_edges) {
  static const char* kLabels[] = {"car",  "tree",  "dog",   "man",  "cup",
                                  "sky",  "table", "chair", "lamp", "bike",
                                  "road", "cat",   "woman", "boat", "kite"};
  static const char* kAttributes[] = {"red",   "big",   "small", "old",
                                      "shiny", "green", "wooden", "tall",
                                      "blue",  "empty"};
  static const char* kPredicates[] = {"on", "near", "under", "next to",
                                      "behind", "holding"};
  const std::size_t n = rng.UniformBelow(max_objects + 1);
  std::vector<ObjectRef> objects;
  for (std::size_t i = 0; i < n; ++i) {
    objects.push_back({"o" + std::to_string(i),
                       kLabels[rng.UniformBelow(std::size(kLabels))]});
  }
  std::vector<AttributePair> attributes;
  std::vector<RelationTriplet> relations;
  if (n > 0) {
    const std::size_t edges = rng.UniformBelow(max_edges + 1);
    for (std::size_t e = 0; e < edges; ++e) {
      const std::string subject = objects[rng.UniformBelow(n)].id;
      if (rng.UniformBelow(2) == 0) {
        attributes.push_back(
            {subject, kAttributes[rng.UniformBelow(std::size(kAttributes))]});
      } else {
        relations.push_back(
            {subject, kPredicates[rng.UniformBelow(std::size(kPredicates))],
             objects[rng.UniformBelow(n)].id});
      }
    }
  }
  return SceneGraph::Create(std::move(objects), std::move(attributes),
                            std::move(relations));
}

DisjointMaskFixture RandomDisjointFixture(Rng& rng, std::size_t max_objects) {
  DisjointMaskFixture fx;
  const std::size_t n = 1 + rng.UniformBelow(max_objects);
  std::vector<std::uint32_t> widths;
  std::uint32_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    widths.push_back(1 + static_cast<std::uint32_t>(rng.UniformBelow(4)));
    used += widths.back();
  }
  fx.height = 4 + static_cast<std::uint32_t>(rng.UniformBelow(5));
  fx.width = used + static_cast<std::uint32_t>(rng.UniformBelow(4));

  std::vector<ObjectRef> objects;
  std::vector<AttributePair> attributes;
  std::vector<RelationTriplet> relations;
  std::uint32_t col = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "o" + std::to_string(i);
    objects.push_back({id, "thing" + std::to_string(i)});
    fx.masks[id] = RectMask(fx.height, fx.width, 0, col, fx.height, widths[i]);
    col += widths[i];
    if (rng.UniformBelow(2) == 0) attributes.push_back({id, "red"});
    if (i > 0 && rng.UniformBelow(2) == 0) {
      relations.push_back({id, "near", "o" + std::to_string(i - 1)});
    }
  }
  fx.graph = SceneGraph::Create(std::move(objects), std::move(attributes),
                                std::move(relations));
  return fx;
}

std::vector<Candidate> FiveRecordCandidates() {
  const char* ids[] = {"a", "b", "c", "d", "e"};
  const double itm[] = {0.9, 0.8, 0.7, 0.6, 0.5};
  const double cd[] = {0.01, 0.05, 0.03, 0.9, 0.9};
  const std::size_t length[] = {10, 20, 30, 40, 50};
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < 5; ++i) {
    MetricReport r;
    r.record_id = ids[i];
    r.icr = 0.5;
    r.aod = cd[i] * static_cast<double>(length[i]) / r.icr;
    r.length = length[i];
    r.detailness = cd[i];
    out.push_back({ids[i], length[i], itm[i], r});
  }
  return out;
}

std::vector<Candidate> RandomCandidates(Rng& rng, std::size_t n) {
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "r%04zu", i);
    MetricReport r;
    r.record_id = id;
    // Coarse values so ties occur and exercise the id tie-break.
    r.icr = static_cast<double>(rng.UniformBelow(21)) / 20.0;
    r.aod = static_cast<double>(rng.UniformBelow(13)) / 4.0;
    r.length = rng.UniformBelow(8) == 0 ? 0 : 5 + rng.UniformBelow(60);
    if (r.length > 0) r.detailness = ComputeDetailness(r.icr, r.aod, r.length);
    out.push_back({id, r.length,
                   static_cast<double>(rng.UniformBelow(1000)) / 1000.0, r});
  }
  return out;
}

}  // namespace capdetail::testing
