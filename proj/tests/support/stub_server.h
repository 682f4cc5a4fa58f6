#ifndef CAPDETAIL_TESTS_SUPPORT_STUB_SERVER_H_
#define CAPDETAIL_TESTS_SUPPORT_STUB_SERVER_H_

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <utility>

#include "capdetail/masks.h"

namespace httplib {
class Server;
}

namespace capdetail::testing {

// How /parse wraps the graph document in its "text" result.
enum class ParseMode {
  kClean,    // the bare document
  kProse,    // "Here is the graph: <doc> Hope this helps!"
  kNoGraph,  // prose only
};

// Deterministic stand-ins for the three model services.
//   /parse    graph from ParseTemplateCaption(caption)
//   /segment  a hashed rectangle per (image, label); labels in
//             ungrounded_labels get no mask
//   /itm      a hashed score in [0.5, 0.9]
std::string StubParseText(std::string_view caption, ParseMode mode);
RleMask StubMask(std::string_view image, std::string_view label,
                 std::uint32_t height, std::uint32_t width);
double StubItm(std::string_view image, std::string_view caption);

struct StubOptions {
  ParseMode parse_mode = ParseMode::kClean;
  std::set<std::string> ungrounded_labels = {"ghost"};
  // Forces every returned mask to this (height, width).
  std::optional<std::pair<std::uint32_t, std::uint32_t>> mask_dims_override;
};

class StubServer {
 public:
  explicit StubServer(StubOptions options = {});
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  // Binds 127.0.0.1 on the given port (0 picks a free one) and serves on a
  // background thread.
  void Start(int port = 0);
  void Stop();
  // Blocks serving on the calling thread.
  void Run(int port);

  std::string base_url() const;
  int port() const { return port_; }

  // The next `count` requests to `path` answer with HTTP `status`.
  void FailNext(const std::string& path, int count, int status = 503);
  std::size_t requests(const std::string& path) const;
  std::string last_authorization() const;

 private:
  void Install();

  StubOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;
  std::map<std::string, std::size_t> requests_;
  std::map<std::string, std::pair<int, int>> failures_;  // count, status
  std::string last_authorization_;
};

}  // namespace capdetail::testing

#endif  // CAPDETAIL_TESTS_SUPPORT_STUB_SERVER_H_
