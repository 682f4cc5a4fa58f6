#ifndef CAPDETAIL_MANIFEST_H_
#define CAPDETAIL_MANIFEST_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "capdetail/errors.h"
#include "capdetail/metrics.h"
#include "json.hpp"

namespace capdetail {

// One image-caption pair. Annotation refs are paths relative to the
// annotation cache directory.
struct DatasetRecord {
  std::string record_id;
  std::string image;
  std::uint32_t image_height = 0;
  std::uint32_t image_width = 0;
  std::string caption;
  std::optional<std::string> scene_graph_ref;
  std::optional<std::string> masks_ref;
  std::optional<double> itm_score;

  bool operator==(const DatasetRecord&) const = default;
};

enum class Strictness { kStrict, kLenient };

struct LineError {
  std::size_t line = 0;
  ErrorCode code = ErrorCode::kMalformedLine;
  std::string message;
};

struct ManifestReadResult {
  std::vector<DatasetRecord> records;
  std::vector<LineError> errors;  // lenient mode only
};

// Throws kMalformedLine for missing or mistyped fields.
DatasetRecord RecordFromJson(const nlohmann::json& node);
std::string SerializeRecord(const DatasetRecord& record);

// Line-delimited records; blank lines are skipped. Strict mode throws on the
// first bad line (kMalformedLine, or kDuplicateId naming both lines);
// lenient mode skips it and reports it in errors.
ManifestReadResult ParseDatasetManifest(std::string_view text,
                                        Strictness strictness);
ManifestReadResult ReadDatasetManifest(const std::filesystem::path& path,
                                       Strictness strictness);

std::string SerializeDatasetManifest(std::span<const DatasetRecord> records);
void WriteDatasetManifest(std::span<const DatasetRecord> records,
                          const std::filesystem::path& path);

std::filesystem::path ResolveRef(const std::filesystem::path& cache_dir,
                                 const std::string& ref);

struct LoadedInputs {
  std::vector<ScoringInput> inputs;
  std::vector<RecordError> errors;
};

// Joins each record with its annotation files. Records whose annotations are
// missing or unreadable become errors.
LoadedInputs LoadScoringInputs(std::span<const DatasetRecord> records,
                               const std::filesystem::path& cache_dir);

}  // namespace capdetail

#endif  // CAPDETAIL_MANIFEST_H_
