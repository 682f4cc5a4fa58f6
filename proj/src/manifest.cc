#include "capdetail/manifest.h"

#include <unordered_map>

#include "capdetail/text.h"

namespace capdetail {
namespace {

using nlohmann::json;

std::string RequiredString(const json& node, const char* field) {
  const auto it = node.find(field);
  if (it == node.end() || !it->is_string()) {
    throw Error(ErrorCode::kMalformedLine,
                std::string("field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

std::uint32_t RequiredDim(const json& node, const char* field) {
  const auto it = node.find(field);
  if (it == node.end() || !it->is_number_unsigned() ||
      it->get<std::uint64_t>() == 0 || it->get<std::uint64_t>() > UINT32_MAX) {
    throw Error(ErrorCode::kMalformedLine,
                std::string("field '") + field +
                    "' must be a positive integer");
  }
  return it->get<std::uint32_t>();
}

std::optional<std::string> OptionalString(const json& node,
                                          const char* field) {
  const auto it = node.find(field);
  if (it == node.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(ErrorCode::kMalformedLine,
                std::string("field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

DatasetRecord RecordFromJson(const json& node) {
  if (!node.is_object()) {
    throw Error(ErrorCode::kMalformedLine, "record must be an object");
  }
  DatasetRecord record;
  record.record_id = RequiredString(node, "record_id");
  if (record.record_id.empty() ||
      record.record_id.find_first_of("\r\n") != std::string::npos) {
    throw Error(ErrorCode::kMalformedLine,
                "record_id must be nonempty and single-line");
  }
  record.image = RequiredString(node, "image");
  record.image_height = RequiredDim(node, "image_height");
  record.image_width = RequiredDim(node, "image_width");
  record.caption = RequiredString(node, "caption");
  record.scene_graph_ref = OptionalString(node, "scene_graph_ref");
  record.masks_ref = OptionalString(node, "masks_ref");
  const auto itm = node.find("itm_score");
  if (itm != node.end() && !itm->is_null()) {
    if (!itm->is_number()) {
      throw Error(ErrorCode::kMalformedLine, "itm_score must be a number");
    }
    record.itm_score = itm->get<double>();
  }
  return record;
}

std::string SerializeRecord(const DatasetRecord& record) {
  nlohmann::ordered_json line;
  line["record_id"] = record.record_id;
  line["image"] = record.image;
  line["image_height"] = record.image_height;
  line["image_width"] = record.image_width;
  line["caption"] = record.caption;
  if (record.scene_graph_ref) line["scene_graph_ref"] = *record.scene_graph_ref;
  if (record.masks_ref) line["masks_ref"] = *record.masks_ref;
  if (record.itm_score) line["itm_score"] = *record.itm_score;
  return line.dump();
}

ManifestReadResult ParseDatasetManifest(std::string_view text,
                                        Strictness strictness) {
  ManifestReadResult result;
  std::unordered_map<std::string, std::size_t> first_line;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (TrimWhitespace(line).empty()) continue;
    try {
      json doc;
      try {
        doc = json::parse(line);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::kMalformedLine, e.what());
      }
      DatasetRecord record = RecordFromJson(doc);
      const auto [it, inserted] =
          first_line.emplace(record.record_id, line_no);
      if (!inserted) {
        throw Error(ErrorCode::kDuplicateId,
                    "record '" + record.record_id + "' on line " +
                        std::to_string(line_no) + " duplicates line " +
                        std::to_string(it->second));
      }
      result.records.push_back(std::move(record));
    } catch (const Error& e) {
      if (strictness == Strictness::kStrict) {
        throw Error(e.code(), "line " + std::to_string(line_no) + ": " +
                                  e.what());
      }
      result.errors.push_back({line_no, e.code(), e.what()});
    }
  }
  return result;
}

ManifestReadResult ReadDatasetManifest(const std::filesystem::path& path,
                                       Strictness strictness) {
  return ParseDatasetManifest(ReadFile(path), strictness);
}

std::string SerializeDatasetManifest(std::span<const DatasetRecord> records) {
  std::string out;
  for (const DatasetRecord& r : records) {
    out += SerializeRecord(r);
    out.push_back('\n');
  }
  return out;
}

void WriteDatasetManifest(std::span<const DatasetRecord> records,
                          const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeDatasetManifest(records));
}

std::filesystem::path ResolveRef(const std::filesystem::path& cache_dir,
                                 const std::string& ref) {
  const std::filesystem::path p(ref);
  return p.is_absolute() ? p : cache_dir / p;
}

LoadedInputs LoadScoringInputs(std::span<const DatasetRecord> records,
                               const std::filesystem::path& cache_dir) {
  LoadedInputs loaded;
  loaded.inputs.reserve(records.size());
  for (const DatasetRecord& r : records) {
    if (!r.scene_graph_ref || !r.masks_ref) {
      loaded.errors.push_back({r.record_id, ErrorCode::kIo,
                               !r.scene_graph_ref
                                   ? "record has no scene_graph_ref"
                                   : "record has no masks_ref"});
      continue;
    }
    try {
      loaded.inputs.push_back({r.record_id, r.image_height, r.image_width,
                               r.caption,
                               ReadFile(ResolveRef(cache_dir, *r.scene_graph_ref)),
                               ReadFile(ResolveRef(cache_dir, *r.masks_ref))});
    } catch (const Error& e) {
      loaded.errors.push_back({r.record_id, e.code(), e.what()});
    }
  }
  return loaded;
}

}  // namespace capdetail
