#ifndef CAPDETAIL_ANNOTATE_H_
#define CAPDETAIL_ANNOTATE_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "capdetail/manifest.h"
#include "capdetail/metrics.h"
#include "capdetail/service_client.h"

namespace capdetail {

// Any client may be null; records needing a missing service fail instead of
// reaching the network.
struct AnnotationClients {
  ServiceClient* parser = nullptr;
  ServiceClient* segmenter = nullptr;
  ServiceClient* itm = nullptr;
};

struct AnnotateOptions {
  unsigned jobs = 1;
};

struct AnnotateResult {
  std::vector<DatasetRecord> records;   // input order, refs filled in
  std::vector<RecordError> failures;    // sorted by record id
  std::vector<std::string> warnings;    // e.g. ungrounded objects
};

// Fills in every missing scene graph, mask document and ITM score. Existing
// annotations are reused untouched, so a second run issues no requests.
// Graph and mask documents are stored content-addressed under cache_dir
// ("graphs/<sha256>.json", "masks/<sha256>.json").
AnnotateResult AnnotateDataset(std::span<const DatasetRecord> records,
                               const AnnotationClients& clients,
                               const std::filesystem::path& cache_dir,
                               const AnnotateOptions& options = {});

// Writes content to <cache_dir>/<kind>/<sha256>.json unless present and
// returns the relative ref.
std::string StoreAnnotation(const std::filesystem::path& cache_dir,
                            std::string_view kind, std::string_view content);

}  // namespace capdetail

#endif  // CAPDETAIL_ANNOTATE_H_
