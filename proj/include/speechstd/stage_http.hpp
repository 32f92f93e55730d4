#pragma once

#include <atomic>
#include <memory>
#include <set>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include "speechstd/error.hpp"
#include "speechstd/mock_backends.hpp"
#include "speechstd/protocol.hpp"

namespace speechstd {

struct CallOptions {
  double timeout_s = 30.0;
  int retries = 2;
  double backoff_base_s = 0.25;
  double backoff_factor = 2.0;
  double jitter = 0.2;  // +/- fraction of each backoff delay
};

// Raised by call_stage; carries one line per attempt and, for RemoteError,
// the decoded error envelope.
class StageCallError : public Error {
 public:
  StageCallError(ErrorKind kind, const std::string& message, std::vector<std::string> attempts,
                 std::optional<RemoteErrorInfo> remote = std::nullopt)
      : Error(kind, message), attempts_(std::move(attempts)), remote_(std::move(remote)) {}

  const std::vector<std::string>& attempts() const { return attempts_; }
  const std::optional<RemoteErrorInfo>& remote() const { return remote_; }

 private:
  std::vector<std::string> attempts_;
  std::optional<RemoteErrorInfo> remote_;
};

// POSTs the request to <endpoint>/v1/<stage>. Connection failures, 5xx and
// timeouts are retried `retries` times with exponential backoff. Throws
// InvalidRequest before any I/O, then Timeout, Unreachable, IdMismatch or
// RemoteError.
StageResponse call_stage(const std::string& endpoint, const StageRequest& req,
                         const CallOptions& options = {});

// GET <endpoint>/v1/health -> {"status":"ok"}
bool check_health(const std::string& endpoint, double timeout_s = 2.0);

class HttpStageBackend : public StageBackend {
 public:
  HttpStageBackend(std::string endpoint, CallOptions options, int max_in_flight = 4);

  StageResponse call(const StageRequest& req) override;
  bool healthy() override;
  std::string describe() const override { return endpoint_; }

 private:
  std::string endpoint_;
  CallOptions options_;
  std::counting_semaphore<> in_flight_;
};

struct MockServerOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  // Requests whose id is listed answer 503 with an injected_failure envelope.
  std::set<std::string> fail_asr_ids;
  std::set<std::string> fail_mt_ids;
  std::set<std::string> fail_tts_ids;
};

// Serves /v1/asr, /v1/mt, /v1/tts and /v1/health from a mock suite.
class MockServer {
 public:
  MockServer(std::shared_ptr<const MockSuite> suite, MockServerOptions options = {});
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();

  int port() const { return port_; }
  std::string url() const;
  std::size_t request_count() const { return requests_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::shared_ptr<const MockSuite> suite_;
  MockServerOptions options_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<std::size_t> requests_{0};
};

}  // namespace speechstd
