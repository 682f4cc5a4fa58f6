#ifndef CAPDETAIL_MASKS_H_
#define CAPDETAIL_MASKS_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace capdetail {

// Uncompressed COCO-style run-length mask: column-major pixel order, runs
// alternate background/foreground starting with a (possibly empty)
// background run. Only the first run may be zero.
struct RleMask {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<std::uint32_t> counts;

  bool operator==(const RleMask&) const = default;
};

// Decoded mask, column-major: pixel (row, col) lives at col * height + row.
struct Bitmap {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<std::uint8_t> bits;

  bool at(std::uint32_t row, std::uint32_t col) const {
    return bits[static_cast<std::size_t>(col) * height + row] != 0;
  }

  bool operator==(const Bitmap&) const = default;
};

// Half-open pixel index range [begin, end) in column-major order.
struct PixelRun {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
};

// Throws Error(kInvalidRle) when the run invariants do not hold.
void ValidateRle(const RleMask& mask);

Bitmap RleDecode(const RleMask& mask);
RleMask RleEncode(const Bitmap& bitmap);

std::uint64_t MaskArea(const RleMask& mask);

// Foreground runs in ascending order.
std::vector<PixelRun> ForegroundRuns(const RleMask& mask);

// Pixels covered by at least one mask, computed by merging runs without
// decoding. Throws kEmptyInput and kDimensionMismatch.
std::uint64_t UnionArea(std::span<const RleMask> masks);
std::uint64_t UnionArea(std::span<const RleMask* const> masks);

// Per-record mask file: object id -> mask. Objects without an entry are
// ungrounded.
using MaskDocument = std::map<std::string, RleMask>;

MaskDocument ParseMaskDocument(std::string_view document);
MaskDocument MaskDocumentFromJson(const nlohmann::json& document);
RleMask RleMaskFromJson(const nlohmann::json& node);
nlohmann::ordered_json RleMaskToJson(const RleMask& mask);
std::string SerializeMaskDocument(const MaskDocument& masks);

}  // namespace capdetail

#endif  // CAPDETAIL_MASKS_H_
