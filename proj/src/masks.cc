#include "capdetail/masks.h"

#include <algorithm>

#include "capdetail/errors.h"

namespace capdetail {
namespace {

using nlohmann::json;

std::uint64_t PixelCount(std::uint32_t height, std::uint32_t width) {
  return static_cast<std::uint64_t>(height) * width;
}

std::string DimsText(const RleMask& m) {
  return std::to_string(m.height) + "x" + std::to_string(m.width);
}

std::uint64_t MergedLength(std::vector<PixelRun>& runs) {
  std::sort(runs.begin(), runs.end(),
            [](const PixelRun& a, const PixelRun& b) {
              return a.begin < b.begin;
            });
  std::uint64_t total = 0;
  std::uint64_t cur_begin = 0;
  std::uint64_t cur_end = 0;
  bool open = false;
  for (const PixelRun& run : runs) {
    if (open && run.begin <= cur_end) {
      cur_end = std::max(cur_end, run.end);
      continue;
    }
    if (open) total += cur_end - cur_begin;
    cur_begin = run.begin;
    cur_end = run.end;
    open = true;
  }
  if (open) total += cur_end - cur_begin;
  return total;
}

template <typename Get>
std::uint64_t UnionAreaImpl(std::size_t n, Get get) {
  if (n == 0) throw Error(ErrorCode::kEmptyInput, "union of no masks");
  const RleMask& first = get(0);
  std::vector<PixelRun> runs;
  for (std::size_t i = 0; i < n; ++i) {
    const RleMask& m = get(i);
    if (m.height != first.height || m.width != first.width) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "mask " + std::to_string(i) + " is " + DimsText(m) +
                      ", expected " + DimsText(first));
    }
    auto mask_runs = ForegroundRuns(m);
    runs.insert(runs.end(), mask_runs.begin(), mask_runs.end());
  }
  return MergedLength(runs);
}

}  // namespace

void ValidateRle(const RleMask& mask) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < mask.counts.size(); ++i) {
    if (i > 0 && mask.counts[i] == 0) {
      throw Error(ErrorCode::kInvalidRle,
                  "zero-length run at position " + std::to_string(i));
    }
    total += mask.counts[i];
  }
  if (total != PixelCount(mask.height, mask.width)) {
    throw Error(ErrorCode::kInvalidRle,
                "runs sum to " + std::to_string(total) + " but mask is " +
                    DimsText(mask));
  }
}

Bitmap RleDecode(const RleMask& mask) {
  ValidateRle(mask);
  Bitmap bitmap{mask.height, mask.width,
                std::vector<std::uint8_t>(PixelCount(mask.height, mask.width))};
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < mask.counts.size(); ++i) {
    if (i % 2 == 1) {
      std::fill_n(bitmap.bits.begin() + static_cast<std::ptrdiff_t>(pos),
                  mask.counts[i], std::uint8_t{1});
    }
    pos += mask.counts[i];
  }
  return bitmap;
}

RleMask RleEncode(const Bitmap& bitmap) {
  RleMask mask{bitmap.height, bitmap.width, {}};
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (std::uint8_t bit : bitmap.bits) {
    const std::uint8_t value = bit != 0 ? 1 : 0;
    if (value != current) {
      mask.counts.push_back(run);
      run = 0;
      current = value;
    }
    ++run;
  }
  if (run > 0 || mask.counts.empty()) mask.counts.push_back(run);
  return mask;
}

std::uint64_t MaskArea(const RleMask& mask) {
  ValidateRle(mask);
  std::uint64_t area = 0;
  for (std::size_t i = 1; i < mask.counts.size(); i += 2) {
    area += mask.counts[i];
  }
  return area;
}

std::vector<PixelRun> ForegroundRuns(const RleMask& mask) {
  ValidateRle(mask);
  std::vector<PixelRun> runs;
  runs.reserve(mask.counts.size() / 2);
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < mask.counts.size(); ++i) {
    if (i % 2 == 1) runs.push_back({pos, pos + mask.counts[i]});
    pos += mask.counts[i];
  }
  return runs;
}

std::uint64_t UnionArea(std::span<const RleMask> masks) {
  return UnionAreaImpl(masks.size(),
                       [&](std::size_t i) -> const RleMask& { return masks[i]; });
}

std::uint64_t UnionArea(std::span<const RleMask* const> masks) {
  return UnionAreaImpl(masks.size(), [&](std::size_t i) -> const RleMask& {
    return *masks[i];
  });
}

RleMask RleMaskFromJson(const json& node) {
  if (!node.is_object()) {
    throw Error(ErrorCode::kInvalidRle, "mask must be an object");
  }
  const auto dim = [&](const char* field) -> std::uint32_t {
    const auto it = node.find(field);
    if (it == node.end() || !it->is_number_unsigned()) {
      throw Error(ErrorCode::kInvalidRle,
                  std::string("mask needs nonnegative integer '") + field +
                      "'");
    }
    const auto value = it->get<std::uint64_t>();
    if (value > UINT32_MAX) {
      throw Error(ErrorCode::kInvalidRle, std::string(field) + " too large");
    }
    return static_cast<std::uint32_t>(value);
  };
  RleMask mask;
  mask.height = dim("height");
  mask.width = dim("width");
  const auto counts = node.find("counts");
  if (counts == node.end() || !counts->is_array()) {
    throw Error(ErrorCode::kInvalidRle, "mask needs a 'counts' array");
  }
  mask.counts.reserve(counts->size());
  for (const auto& c : *counts) {
    if (!c.is_number_unsigned() || c.get<std::uint64_t>() > UINT32_MAX) {
      throw Error(ErrorCode::kInvalidRle,
                  "counts must be nonnegative 32-bit integers");
    }
    mask.counts.push_back(c.get<std::uint32_t>());
  }
  ValidateRle(mask);
  return mask;
}

MaskDocument MaskDocumentFromJson(const json& document) {
  if (!document.is_object()) {
    throw Error(ErrorCode::kMalformedDocument,
                "mask document must map object ids to masks");
  }
  MaskDocument masks;
  for (const auto& [id, node] : document.items()) {
    try {
      masks.emplace(id, RleMaskFromJson(node));
    } catch (const Error& e) {
      throw Error(e.code(), "object '" + id + "': " + e.what());
    }
  }
  return masks;
}

MaskDocument ParseMaskDocument(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
  return MaskDocumentFromJson(doc);
}

nlohmann::ordered_json RleMaskToJson(const RleMask& mask) {
  return {{"height", mask.height},
          {"width", mask.width},
          {"counts", mask.counts}};
}

std::string SerializeMaskDocument(const MaskDocument& masks) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [id, mask] : masks) doc[id] = RleMaskToJson(mask);
  return doc.dump();
}

}  // namespace capdetail
