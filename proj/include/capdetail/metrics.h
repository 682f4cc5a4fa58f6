#ifndef CAPDETAIL_METRICS_H_
#define CAPDETAIL_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "capdetail/errors.h"
#include "capdetail/masks.h"
#include "capdetail/scene_graph.h"

namespace capdetail {

// Per-record caption detailness figures. icr is a fraction in [0, 1];
// detailness is absent when the caption has no words.
struct MetricReport {
  std::string record_id;
  double icr = 0.0;
  double aod = 0.0;
  std::size_t length = 0;
  std::optional<double> detailness;

  bool operator==(const MetricReport&) const = default;
};

// Image coverage rate: union mask area over image area. An empty mask list
// gives 0. Throws kZeroImageArea and kDimensionMismatch.
double ComputeIcr(std::uint32_t image_height, std::uint32_t image_width,
                  std::span<const RleMask> masks);
double ComputeIcr(std::uint32_t image_height, std::uint32_t image_width,
                  std::span<const RleMask* const> masks);

// Average object detailness: mean of relation + attribute degree over all
// objects, 0 for an empty graph.
double ComputeAod(const SceneGraph& graph,
                  RelationCounting counting = RelationCounting::kSubjectOnly);

// Number of Unicode-whitespace-delimited tokens.
std::size_t CaptionLength(std::string_view caption);

// icr * aod / length. Throws kZeroLength when length is 0.
double ComputeDetailness(double icr, double aod, std::size_t length);

// Masks of the graph's objects that have one; ungrounded objects are skipped.
std::vector<const RleMask*> GroundedMasks(const SceneGraph& graph,
                                          const MaskDocument& masks);

MetricReport ScoreRecord(std::string record_id, std::uint32_t image_height,
                         std::uint32_t image_width, std::string_view caption,
                         const SceneGraph& graph, const MaskDocument& masks,
                         RelationCounting counting =
                             RelationCounting::kSubjectOnly);

// One record with its annotation documents already loaded.
struct ScoringInput {
  std::string record_id;
  std::uint32_t image_height = 0;
  std::uint32_t image_width = 0;
  std::string caption;
  std::string graph_document;
  std::string mask_document;
};

struct RecordError {
  std::string record_id;
  ErrorCode code = ErrorCode::kInvalidArgument;
  std::string message;

  bool operator==(const RecordError&) const = default;
};

struct ScoreOptions {
  RelationCounting counting = RelationCounting::kSubjectOnly;
  unsigned jobs = 1;
};

struct ScoreResult {
  std::vector<MetricReport> reports;  // sorted by record id
  std::vector<RecordError> errors;    // sorted by record id
};

// Scores every record independently; a failing record lands in errors and
// never aborts the batch. Output order does not depend on jobs.
ScoreResult ScoreDataset(std::span<const ScoringInput> inputs,
                         const ScoreOptions& options = {});

// Line-delimited report format:
//   {"record_id","icr","aod","length","detailness"} with detailness null
// when undefined.
std::string SerializeReport(const MetricReport& report);
std::string SerializeReports(std::span<const MetricReport> reports);
std::vector<MetricReport> ParseReports(std::string_view text);

std::string SerializeRecordError(const RecordError& error);

}  // namespace capdetail

#endif  // CAPDETAIL_METRICS_H_
