#ifndef CAPDETAIL_TESTS_SUPPORT_FIXTURES_H_
#define CAPDETAIL_TESTS_SUPPORT_FIXTURES_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "capdetail/filtering.h"
#include "capdetail/masks.h"
#include "capdetail/random.h"
#include "capdetail/scene_graph.h"

namespace capdetail::testing {

// Deleted on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::filesystem::path TestDataDir();

// Axis-aligned rectangle [row0, row0 + rows) x [col0, col0 + cols).
RleMask RectMask(std::uint32_t height, std::uint32_t width, std::uint32_t row0,
                 std::uint32_t col0, std::uint32_t rows, std::uint32_t cols);

Bitmap RandomBitmap(Rng& rng, std::uint32_t height, std::uint32_t width);

// Bitwise OR of decoded masks, counted pixel by pixel.
std::uint64_t BitmapOrArea(const std::vector<RleMask>& masks);

// Objects o0..o{n-1} with single-word labels; up to max_edges attribute and
// relation edges (self-relations allowed).
SceneGraph RandomSceneGraph(Rng& rng, std::size_t max_objects,
                            std::size_t max_edges);

// Graph with n objects, each owning one column stripe of a height x width
// image with a random (nonzero) width, so masks are pairwise disjoint.
struct DisjointMaskFixture {
  SceneGraph graph;
  MaskDocument masks;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
};
DisjointMaskFixture RandomDisjointFixture(Rng& rng, std::size_t max_objects);

// Records a..e: ITM .9/.8/.7/.6/.5, detailness .01/.05/.03/.9/.9, caption
// lengths 10/20/30/40/50, ICR 0.5 and AOD chosen to give that detailness.
std::vector<Candidate> FiveRecordCandidates();

// n records with random ITM, ICR, AOD and length; ids r0000.. .
std::vector<Candidate> RandomCandidates(Rng& rng, std::size_t n);

}  // namespace capdetail::testing

#endif  // CAPDETAIL_TESTS_SUPPORT_FIXTURES_H_
