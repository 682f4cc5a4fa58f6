#ifndef CAPDETAIL_SERVICE_CLIENT_H_
#define CAPDETAIL_SERVICE_CLIENT_H_

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "capdetail/masks.h"
#include "capdetail/random.h"
#include "capdetail/scene_graph.h"
#include "json.hpp"

namespace capdetail {

// Wire protocol shared by the parser, segmentation and ITM services:
//   POST <base_url>/parse | /segment | /itm
//   request  {"task": "parse"|"segment"|"itm", "payload": {...}}
//   response {"ok": true, "result": {...}} or {"ok": false, "error": "..."}
// Payloads and results:
//   parse    {"caption"}                       -> {"text"} or {"graph"}
//   segment  {"image", "image_height", "image_width",
//             "objects": [{"id", "label"}]}    -> {"masks": {id: rle}}
//   itm      {"image", "caption"}              -> {"score"}
inline constexpr std::string_view kParsePath = "/parse";
inline constexpr std::string_view kSegmentPath = "/segment";
inline constexpr std::string_view kItmPath = "/itm";

struct ServiceEndpointConfig {
  std::string base_url;  // http://host:port[/prefix]
  double timeout_seconds = 60.0;
  int max_retries = 3;
  int max_concurrency = 4;
  // Name of the environment variable holding a bearer token; empty for none.
  std::string auth_token_env;
  int backoff_initial_ms = 200;
  int backoff_max_ms = 10000;

  void Validate() const;
};

// Thread-safe; at most max_concurrency requests are in flight at once.
class ServiceClient {
 public:
  explicit ServiceClient(ServiceEndpointConfig config);

  // Sends one envelope and returns "result". Transport failures, 429 and
  // 5xx responses are retried with jittered exponential backoff; other
  // failures throw kTransport right away.
  nlohmann::json Call(std::string_view path, std::string_view task,
                      const nlohmann::json& payload);

  // HTTP attempts made so far, retries included.
  std::size_t attempts() const { return attempts_.load(); }

  const ServiceEndpointConfig& config() const { return config_; }

 private:
  int BackoffMillis(int retry);

  ServiceEndpointConfig config_;
  std::string host_;      // scheme://host:port
  std::string prefix_;    // path prefix, no trailing slash
  std::counting_semaphore<> slots_;
  std::atomic<std::size_t> attempts_{0};
  std::mutex jitter_mu_;
  Rng jitter_;
};

// First canonical graph document embedded in free text (the parser may wrap
// it in prose). Throws kNoGraphInResponse, or kValidationFailed when the
// first candidate is not a valid graph.
SceneGraph ExtractSceneGraph(std::string_view text);

SceneGraph RequestSceneGraph(ServiceClient& client, std::string_view caption);

struct MaskResponse {
  MaskDocument masks;
  std::vector<std::string> ungrounded;  // object ids without a mask
};

// Sends nothing for an empty object list. Throws kDimensionMismatch naming
// the object whose mask disagrees with the declared image size.
MaskResponse RequestMasks(ServiceClient& client, const std::string& image,
                          std::uint32_t image_height,
                          std::uint32_t image_width,
                          std::span<const ObjectRef> objects);

// ITM requests memoized by (image ref, caption hash).
class ItmScorer {
 public:
  explicit ItmScorer(ServiceClient& client) : client_(client) {}

  double Score(const std::string& image, std::string_view caption);

 private:
  ServiceClient& client_;
  std::mutex mu_;
  std::map<std::pair<std::string, std::string>, double> cache_;
};

}  // namespace capdetail

#endif  // CAPDETAIL_SERVICE_CLIENT_H_
