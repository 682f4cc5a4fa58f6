#include "capdetail/service_client.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "capdetail/errors.h"
#include "capdetail/text.h"
#include "httplib.h"

namespace capdetail {
namespace {

using nlohmann::json;

// Index one past the brace matching text[open], honoring JSON strings, or
// npos when unbalanced.
std::size_t MatchBrace(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

class SemaphoreSlot {
 public:
  explicit SemaphoreSlot(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SemaphoreSlot() { s_.release(); }
  SemaphoreSlot(const SemaphoreSlot&) = delete;
  SemaphoreSlot& operator=(const SemaphoreSlot&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

}  // namespace

void ServiceEndpointConfig::Validate() const {
  if (base_url.rfind("http://", 0) != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "base_url must start with http://, got '" + base_url + "'");
  }
  if (max_retries < 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_retries must be >= 0");
  }
  if (max_concurrency < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_concurrency must be >= 1");
  }
  if (!(timeout_seconds > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "timeout must be > 0");
  }
}

ServiceClient::ServiceClient(ServiceEndpointConfig config)
    : config_(std::move(config)),
      slots_((config_.Validate(), config_.max_concurrency)),
      jitter_(DeriveSeed(0, config_.base_url)) {
  const std::size_t host_start = std::string_view("http://").size();
  const std::size_t slash = config_.base_url.find('/', host_start);
  host_ = config_.base_url.substr(0, slash);
  if (slash != std::string::npos) {
    prefix_ = config_.base_url.substr(slash);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }
}

int ServiceClient::BackoffMillis(int retry) {
  const double base = std::min<double>(
      config_.backoff_max_ms,
      config_.backoff_initial_ms * std::pow(2.0, retry));
  double jitter;
  {
    std::lock_guard<std::mutex> lock(jitter_mu_);
    jitter = jitter_.UniformUnit();
  }
  return static_cast<int>(base * (0.5 + 0.5 * jitter));
}

json ServiceClient::Call(std::string_view path, std::string_view task,
                         const json& payload) {
  const std::string body =
      json{{"task", std::string(task)}, {"payload", payload}}.dump();
  httplib::Headers headers;
  if (!config_.auth_token_env.empty()) {
    if (const char* token = std::getenv(config_.auth_token_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }
  const std::string target = prefix_ + std::string(path);
  const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  const auto timeout_us =
      std::chrono::duration_cast<std::chrono::microseconds>(timeout);

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(BackoffMillis(attempt - 1)));
    }
    httplib::Result response;
    {
      SemaphoreSlot slot(slots_);
      httplib::Client http(host_);
      http.set_connection_timeout(timeout_us);
      http.set_read_timeout(timeout_us);
      http.set_write_timeout(timeout_us);
      ++attempts_;
      response = http.Post(target, headers, body, "application/json");
    }
    if (!response) {
      last_error = host_ + target + ": " + httplib::to_string(response.error());
      continue;
    }
    if (response->status == 429 || response->status >= 500) {
      last_error = host_ + target + ": HTTP " + std::to_string(response->status);
      continue;
    }
    if (response->status != 200) {
      throw Error(ErrorCode::kTransport,
                  host_ + target + ": HTTP " + std::to_string(response->status));
    }
    json envelope;
    try {
      envelope = json::parse(response->body);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kTransport,
                  host_ + target + ": response is not JSON: " + e.what());
    }
    if (!envelope.is_object() || !envelope.value("ok", false)) {
      const std::string message =
          envelope.is_object() && envelope.contains("error") &&
                  envelope["error"].is_string()
              ? envelope["error"].get<std::string>()
              : "malformed response envelope";
      throw Error(ErrorCode::kTransport, host_ + target + ": " + message);
    }
    if (!envelope.contains("result")) {
      throw Error(ErrorCode::kTransport, host_ + target + ": no result");
    }
    return envelope["result"];
  }
  throw Error(ErrorCode::kTransport,
              "gave up after " + std::to_string(config_.max_retries + 1) +
                  " attempts: " + last_error);
}

SceneGraph ExtractSceneGraph(std::string_view text) {
  std::size_t pos = text.find('{');
  while (pos != std::string_view::npos) {
    const std::size_t end = MatchBrace(text, pos);
    if (end == std::string_view::npos) break;
    json doc = json::parse(text.substr(pos, end - pos), nullptr,
                           /*allow_exceptions=*/false);
    if (!doc.is_discarded() && doc.is_object() && doc.contains("objects")) {
      try {
        return SceneGraphFromJson(doc);
      } catch (const Error& e) {
        throw Error(ErrorCode::kValidationFailed, e.what());
      }
    }
    pos = text.find('{', pos + 1);
  }
  throw Error(ErrorCode::kNoGraphInResponse,
              "no graph document in parser response");
}

SceneGraph RequestSceneGraph(ServiceClient& client, std::string_view caption) {
  const json result = client.Call(kParsePath, "parse",
                                  json{{"caption", std::string(caption)}});
  if (result.is_object() && result.contains("graph") &&
      result["graph"].is_object()) {
    try {
      return SceneGraphFromJson(result["graph"]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kValidationFailed, e.what());
    }
  }
  if (result.is_object() && result.contains("text") &&
      result["text"].is_string()) {
    return ExtractSceneGraph(result["text"].get<std::string>());
  }
  if (result.is_string()) return ExtractSceneGraph(result.get<std::string>());
  throw Error(ErrorCode::kNoGraphInResponse,
              "parser result has neither 'text' nor 'graph'");
}

MaskResponse RequestMasks(ServiceClient& client, const std::string& image,
                          std::uint32_t image_height,
                          std::uint32_t image_width,
                          std::span<const ObjectRef> objects) {
  MaskResponse response;
  if (objects.empty()) return response;
  json payload{{"image", image},
               {"image_height", image_height},
               {"image_width", image_width},
               {"objects", json::array()}};
  for (const ObjectRef& o : objects) {
    payload["objects"].push_back({{"id", o.id}, {"label", o.label}});
  }
  const json result = client.Call(kSegmentPath, "segment", payload);
  if (!result.is_object() || !result.contains("masks") ||
      !result["masks"].is_object()) {
    throw Error(ErrorCode::kTransport, "segment result has no 'masks' object");
  }
  const json& masks = result["masks"];
  for (const ObjectRef& o : objects) {
    const auto it = masks.find(o.id);
    if (it == masks.end() || it->is_null()) {
      response.ungrounded.push_back(o.id);
      continue;
    }
    RleMask mask;
    try {
      mask = RleMaskFromJson(*it);
    } catch (const Error& e) {
      throw Error(e.code(), "object '" + o.id + "': " + e.what());
    }
    if (mask.height != image_height || mask.width != image_width) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "mask for object '" + o.id + "' (" + o.label + ") is " +
                      std::to_string(mask.height) + "x" +
                      std::to_string(mask.width) + ", image is " +
                      std::to_string(image_height) + "x" +
                      std::to_string(image_width));
    }
    response.masks.emplace(o.id, std::move(mask));
  }
  return response;
}

double ItmScorer::Score(const std::string& image, std::string_view caption) {
  auto key = std::make_pair(image, Sha256Hex(caption));
  {
    std::lock_guard<std::mutex> lock(mu_);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const json result = client_.Call(
      kItmPath, "itm", json{{"image", image}, {"caption", std::string(caption)}});
  if (!result.is_object() || !result.contains("score") ||
      !result["score"].is_number()) {
    throw Error(ErrorCode::kTransport, "itm result has no numeric 'score'");
  }
  const double score = result["score"].get<double>();
  std::lock_guard<std::mutex> lock(mu_);
  cache_.emplace(std::move(key), score);
  return score;
}

}  // namespace capdetail
