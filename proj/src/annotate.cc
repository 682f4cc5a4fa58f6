#include "capdetail/annotate.h"

#include <algorithm>
#include <mutex>
#include <optional>
#include <thread>

#include "capdetail/text.h"

namespace capdetail {
namespace {

bool RefPresent(const std::optional<std::string>& ref,
                const std::filesystem::path& cache_dir) {
  return ref && std::filesystem::exists(ResolveRef(cache_dir, *ref));
}

struct RecordOutcome {
  DatasetRecord record;
  std::optional<RecordError> failure;
  std::vector<std::string> warnings;
};

RecordOutcome AnnotateOne(const DatasetRecord& input,
                          const AnnotationClients& clients,
                          ItmScorer* itm_scorer,
                          const std::filesystem::path& cache_dir) {
  RecordOutcome out{input, std::nullopt, {}};
  DatasetRecord& record = out.record;
  const auto fail = [&](ErrorCode code, const std::string& message) {
    out.failure = RecordError{record.record_id, code, message};
  };
  try {
    std::optional<SceneGraph> graph;
    if (RefPresent(record.scene_graph_ref, cache_dir)) {
      if (!RefPresent(record.masks_ref, cache_dir)) {
        graph = ParseSceneGraph(
            ReadFile(ResolveRef(cache_dir, *record.scene_graph_ref)));
      }
    } else if (clients.parser == nullptr) {
      fail(ErrorCode::kIo, "scene graph missing and no parser configured");
    } else {
      graph = RequestSceneGraph(*clients.parser, record.caption);
      record.scene_graph_ref =
          StoreAnnotation(cache_dir, "graphs", SerializeSceneGraph(*graph));
    }

    if (!out.failure && !RefPresent(record.masks_ref, cache_dir)) {
      if (clients.segmenter == nullptr) {
        fail(ErrorCode::kIo, "masks missing and no segmenter configured");
      } else {
        MaskResponse masks = RequestMasks(
            *clients.segmenter, record.image, record.image_height,
            record.image_width, graph->objects());
        for (const std::string& id : masks.ungrounded) {
          out.warnings.push_back(record.record_id + ": object '" + id +
                                 "' was not grounded");
        }
        record.masks_ref = StoreAnnotation(
            cache_dir, "masks", SerializeMaskDocument(masks.masks));
      }
    }

    if (!record.itm_score) {
      if (itm_scorer == nullptr) {
        if (!out.failure) {
          fail(ErrorCode::kIo, "ITM score missing and no scorer configured");
        }
      } else {
        record.itm_score = itm_scorer->Score(record.image, record.caption);
      }
    }
  } catch (const Error& e) {
    fail(e.code(), e.what());
  }
  return out;
}

}  // namespace

std::string StoreAnnotation(const std::filesystem::path& cache_dir,
                            std::string_view kind, std::string_view content) {
  const std::string ref =
      std::string(kind) + "/" + Sha256Hex(content) + ".json";
  const std::filesystem::path path = cache_dir / ref;
  if (!std::filesystem::exists(path)) WriteFileAtomic(path, content);
  return ref;
}

AnnotateResult AnnotateDataset(std::span<const DatasetRecord> records,
                               const AnnotationClients& clients,
                               const std::filesystem::path& cache_dir,
                               const AnnotateOptions& options) {
  std::optional<ItmScorer> itm_scorer;
  if (clients.itm != nullptr) itm_scorer.emplace(*clients.itm);
  ItmScorer* scorer = itm_scorer ? &*itm_scorer : nullptr;

  std::vector<std::optional<RecordOutcome>> outcomes(records.size());
  const unsigned jobs = std::max(1u, options.jobs);
  const auto run = [&](unsigned worker) {
    for (std::size_t i = worker; i < records.size(); i += jobs) {
      outcomes[i] = AnnotateOne(records[i], clients, scorer, cache_dir);
    }
  };
  if (jobs == 1) {
    run(0);
  } else {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < jobs; ++t) workers.emplace_back(run, t);
  }

  AnnotateResult result;
  for (auto& outcome : outcomes) {
    result.records.push_back(std::move(outcome->record));
    if (outcome->failure) result.failures.push_back(*outcome->failure);
    for (auto& w : outcome->warnings) result.warnings.push_back(std::move(w));
  }
  std::sort(result.failures.begin(), result.failures.end(),
            [](const RecordError& a, const RecordError& b) {
              return a.record_id < b.record_id;
            });
  return result;
}

}  // namespace capdetail
