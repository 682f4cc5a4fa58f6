#include "capdetail/metrics.h"

#include <algorithm>
#include <thread>

#include "capdetail/text.h"

namespace capdetail {
namespace {

template <typename Masks>
double IcrImpl(std::uint32_t image_height, std::uint32_t image_width,
               Masks masks) {
  const std::uint64_t image_area =
      static_cast<std::uint64_t>(image_height) * image_width;
  if (image_area == 0) {
    throw Error(ErrorCode::kZeroImageArea,
                std::to_string(image_height) + "x" +
                    std::to_string(image_width));
  }
  if (masks.empty()) return 0.0;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const RleMask& m = [&]() -> const RleMask& {
      if constexpr (std::is_pointer_v<typename Masks::element_type>) {
        return *masks[i];
      } else {
        return masks[i];
      }
    }();
    if (m.height != image_height || m.width != image_width) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "mask " + std::to_string(i) + " is " +
                      std::to_string(m.height) + "x" +
                      std::to_string(m.width) + ", image is " +
                      std::to_string(image_height) + "x" +
                      std::to_string(image_width));
    }
  }
  return static_cast<double>(UnionArea(masks)) /
         static_cast<double>(image_area);
}

}  // namespace

double ComputeIcr(std::uint32_t image_height, std::uint32_t image_width,
                  std::span<const RleMask> masks) {
  return IcrImpl(image_height, image_width, masks);
}

double ComputeIcr(std::uint32_t image_height, std::uint32_t image_width,
                  std::span<const RleMask* const> masks) {
  return IcrImpl(image_height, image_width, masks);
}

double ComputeAod(const SceneGraph& graph, RelationCounting counting) {
  if (graph.empty()) return 0.0;
  std::size_t total = 0;
  for (const ObjectDegree& d : ObjectDegrees(graph, counting)) {
    total += d.relations + d.attributes;
  }
  return static_cast<double>(total) /
         static_cast<double>(graph.objects().size());
}

std::size_t CaptionLength(std::string_view caption) {
  return SplitUnicodeWhitespace(caption).size();
}

double ComputeDetailness(double icr, double aod, std::size_t length) {
  if (length == 0) {
    throw Error(ErrorCode::kZeroLength, "caption has no words");
  }
  return icr * aod / static_cast<double>(length);
}

std::vector<const RleMask*> GroundedMasks(const SceneGraph& graph,
                                          const MaskDocument& masks) {
  std::vector<const RleMask*> grounded;
  for (const ObjectRef& object : graph.objects()) {
    const auto it = masks.find(object.id);
    if (it != masks.end()) grounded.push_back(&it->second);
  }
  return grounded;
}

MetricReport ScoreRecord(std::string record_id, std::uint32_t image_height,
                         std::uint32_t image_width, std::string_view caption,
                         const SceneGraph& graph, const MaskDocument& masks,
                         RelationCounting counting) {
  MetricReport report;
  report.record_id = std::move(record_id);
  const auto grounded = GroundedMasks(graph, masks);
  report.icr = ComputeIcr(image_height, image_width,
                          std::span<const RleMask* const>(grounded));
  report.aod = ComputeAod(graph, counting);
  report.length = CaptionLength(caption);
  if (report.length > 0) {
    report.detailness = ComputeDetailness(report.icr, report.aod, report.length);
  }
  return report;
}

ScoreResult ScoreDataset(std::span<const ScoringInput> inputs,
                         const ScoreOptions& options) {
  std::vector<std::optional<MetricReport>> reports(inputs.size());
  std::vector<std::optional<RecordError>> errors(inputs.size());

  const auto score_one = [&](std::size_t i) {
    const ScoringInput& in = inputs[i];
    try {
      const SceneGraph graph = ParseSceneGraph(in.graph_document);
      const MaskDocument masks = ParseMaskDocument(in.mask_document);
      reports[i] = ScoreRecord(in.record_id, in.image_height, in.image_width,
                               in.caption, graph, masks, options.counting);
    } catch (const Error& e) {
      errors[i] = RecordError{in.record_id, e.code(), e.what()};
    }
  };

  const unsigned jobs = std::max(1u, options.jobs);
  if (jobs == 1 || inputs.size() < 2) {
    for (std::size_t i = 0; i < inputs.size(); ++i) score_one(i);
  } else {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < jobs; ++t) {
      workers.emplace_back([&, t] {
        for (std::size_t i = t; i < inputs.size(); i += jobs) score_one(i);
      });
    }
  }

  ScoreResult result;
  for (auto& r : reports) {
    if (r) result.reports.push_back(std::move(*r));
  }
  for (auto& e : errors) {
    if (e) result.errors.push_back(std::move(*e));
  }
  std::stable_sort(result.reports.begin(), result.reports.end(),
                   [](const MetricReport& a, const MetricReport& b) {
                     return a.record_id < b.record_id;
                   });
  std::stable_sort(result.errors.begin(), result.errors.end(),
                   [](const RecordError& a, const RecordError& b) {
                     return a.record_id < b.record_id;
                   });
  return result;
}

std::string SerializeReport(const MetricReport& report) {
  nlohmann::ordered_json line;
  line["record_id"] = report.record_id;
  line["icr"] = report.icr;
  line["aod"] = report.aod;
  line["length"] = report.length;
  line["detailness"] = report.detailness
                           ? nlohmann::ordered_json(*report.detailness)
                           : nlohmann::ordered_json(nullptr);
  return line.dump();
}

std::string SerializeReports(std::span<const MetricReport> reports) {
  std::string out;
  for (const auto& r : reports) {
    out += SerializeReport(r);
    out.push_back('\n');
  }
  return out;
}

std::vector<MetricReport> ParseReports(std::string_view text) {
  std::vector<MetricReport> reports;
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
      const auto doc = nlohmann::json::parse(line);
      MetricReport r;
      r.record_id = doc.at("record_id").get<std::string>();
      r.icr = doc.at("icr").get<double>();
      r.aod = doc.at("aod").get<double>();
      r.length = doc.at("length").get<std::size_t>();
      const auto& cd = doc.at("detailness");
      if (!cd.is_null()) r.detailness = cd.get<double>();
      reports.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedLine,
                  "report line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return reports;
}

std::string SerializeRecordError(const RecordError& error) {
  nlohmann::ordered_json line;
  line["record_id"] = error.record_id;
  line["error"] = std::string(ErrorCodeName(error.code));
  line["message"] = error.message;
  return line.dump();
}

}  // namespace capdetail
