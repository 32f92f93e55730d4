#include "speechstd/stage_http.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include <spdlog/spdlog.h>

#include "httplib.h"

namespace speechstd {

namespace {

struct ParsedEndpoint {
  std::string host;
  int port = 80;
  std::string prefix;  // no trailing slash
};

ParsedEndpoint parse_endpoint(const std::string& url) {
  std::string rest = url;
  const std::string scheme = "http://";
  if (rest.rfind(scheme, 0) == 0) {
    rest = rest.substr(scheme.size());
  } else if (rest.find("://") != std::string::npos) {
    throw Error(ErrorKind::InvalidParams, "only http:// endpoints are supported: " + url);
  }
  ParsedEndpoint ep;
  const auto slash = rest.find('/');
  std::string host_port = rest.substr(0, slash);
  if (slash != std::string::npos) ep.prefix = rest.substr(slash);
  while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
  const auto colon = host_port.rfind(':');
  if (colon != std::string::npos) {
    ep.host = host_port.substr(0, colon);
    try {
      ep.port = std::stoi(host_port.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidParams, "bad port in endpoint " + url);
    }
  } else {
    ep.host = host_port;
  }
  if (ep.host.empty()) throw Error(ErrorKind::InvalidParams, "missing host in endpoint " + url);
  return ep;
}

void configure(httplib::Client& cli, double timeout_s) {
  const auto secs = static_cast<time_t>(timeout_s);
  const auto usecs = static_cast<time_t>((timeout_s - static_cast<double>(secs)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
}

std::optional<RemoteErrorInfo> envelope_of(const std::string& body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const StageResponse r = response_from_json(j);
    return r.error;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

double jitter_factor(double jitter) {
  thread_local std::mt19937 rng{std::random_device{}()};
  std::uniform_real_distribution<double> dist(-jitter, jitter);
  return 1.0 + dist(rng);
}

}  // namespace

StageResponse call_stage(const std::string& endpoint, const StageRequest& req, const CallOptions& options) {
  req.validate();
  const ParsedEndpoint ep = parse_endpoint(endpoint);
  const std::string path = ep.prefix + "/v1/" + std::string(to_string(req.stage));
  const std::string body = to_json(req).dump();

  std::vector<std::string> attempts;
  ErrorKind last_kind = ErrorKind::Unreachable;
  std::string last_message;
  std::optional<RemoteErrorInfo> last_remote;

  for (int attempt = 0; attempt <= options.retries; ++attempt) {
    httplib::Client cli(ep.host, ep.port);
    configure(cli, options.timeout_s);
    const auto started = std::chrono::steady_clock::now();
    auto res = cli.Post(path, body, "application/json");
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                             (err == httplib::Error::Read && elapsed >= 0.9 * options.timeout_s);
      last_kind = timed_out ? ErrorKind::Timeout : ErrorKind::Unreachable;
      last_message = httplib::to_string(err);
      last_remote.reset();
    } else if (res->status >= 500) {
      last_kind = ErrorKind::RemoteError;
      last_remote = envelope_of(res->body);
      last_message = "HTTP " + std::to_string(res->status) + (last_remote ? " " + last_remote->code : "");
    } else if (res->status >= 400) {
      auto remote = envelope_of(res->body);
      attempts.push_back("attempt " + std::to_string(attempt + 1) + ": HTTP " + std::to_string(res->status));
      throw StageCallError(ErrorKind::RemoteError,
                           req.id + ": " + (remote ? remote->code + ": " + remote->message : res->body),
                           std::move(attempts), std::move(remote));
    } else {
      attempts.push_back("attempt " + std::to_string(attempt + 1) + ": HTTP " + std::to_string(res->status));
      StageResponse response;
      try {
        response = response_from_json(nlohmann::json::parse(res->body));
        response.validate();
      } catch (const std::exception& e) {
        throw StageCallError(ErrorKind::RemoteError, req.id + ": malformed response: " + e.what(), std::move(attempts));
      }
      if (response.id != req.id) {
        throw StageCallError(ErrorKind::IdMismatch, "sent '" + req.id + "', got '" + response.id + "'",
                             std::move(attempts));
      }
      if (response.error) {
        throw StageCallError(ErrorKind::RemoteError, req.id + ": " + response.error->code + ": " + response.error->message,
                             std::move(attempts), response.error);
      }
      return response;
    }

    attempts.push_back("attempt " + std::to_string(attempt + 1) + ": " + last_message);
    if (attempt < options.retries) {
      const double delay =
          options.backoff_base_s * std::pow(options.backoff_factor, attempt) * jitter_factor(options.jitter);
      spdlog::debug("{} {}: {}; retrying in {:.3f} s", endpoint, req.id, last_message, delay);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
  }
  std::string summary = req.id + " via " + endpoint + " failed after " + std::to_string(attempts.size()) + " attempts";
  if (last_remote) summary += ": " + last_remote->code + ": " + last_remote->message;
  throw StageCallError(last_kind, summary, std::move(attempts), std::move(last_remote));
}

bool check_health(const std::string& endpoint, double timeout_s) {
  try {
    const ParsedEndpoint ep = parse_endpoint(endpoint);
    httplib::Client cli(ep.host, ep.port);
    configure(cli, timeout_s);
    auto res = cli.Get(ep.prefix + "/v1/health");
    if (!res || res->status != 200) return false;
    const auto j = nlohmann::json::parse(res->body);
    return j.value("status", "") == "ok";
  } catch (const std::exception&) {
    return false;
  }
}

HttpStageBackend::HttpStageBackend(std::string endpoint, CallOptions options, int max_in_flight)
    : endpoint_(std::move(endpoint)), options_(options), in_flight_(std::max(1, max_in_flight)) {
  parse_endpoint(endpoint_);
}

StageResponse HttpStageBackend::call(const StageRequest& req) {
  req.validate();
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{in_flight_};
  return call_stage(endpoint_, req, options_);
}

bool HttpStageBackend::healthy() { return check_health(endpoint_, std::min(options_.timeout_s, 5.0)); }

struct MockServer::Impl {
  httplib::Server server;
};

MockServer::MockServer(std::shared_ptr<const MockSuite> suite, MockServerOptions options)
    : impl_(std::make_unique<Impl>()), suite_(std::move(suite)), options_(std::move(options)) {
  auto& svr = impl_->server;
  auto reply = [](httplib::Response& res, int status, const nlohmann::json& j) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  };

  svr.Get("/v1/health", [reply](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, {{"status", "ok"}, {"protocol", std::string(kProtocolVersion)}, {"stages", {"asr", "mt", "tts"}}});
  });

  for (const Stage stage : {Stage::Asr, Stage::Mt, Stage::Tts}) {
    const std::string path = "/v1/" + std::string(to_string(stage));
    svr.Post(path, [this, stage, reply](const httplib::Request& http_req, httplib::Response& res) {
      ++requests_;
      StageRequest req;
      try {
        req = request_from_json(nlohmann::json::parse(http_req.body));
        if (req.stage != stage) {
          throw Error(ErrorKind::InvalidRequest, "stage '" + std::string(to_string(req.stage)) + "' posted to /v1/" +
                                                     std::string(to_string(stage)));
        }
        req.validate();
      } catch (const std::exception& e) {
        reply(res, 400, to_json(StageResponse::failure(req.id.empty() ? "?" : req.id, error_code::kInvalidRequest, e.what())));
        return;
      }
      const auto& fail = stage == Stage::Asr  ? options_.fail_asr_ids
                         : stage == Stage::Mt ? options_.fail_mt_ids
                                              : options_.fail_tts_ids;
      if (fail.count(req.id)) {
        reply(res, 503, to_json(StageResponse::failure(req.id, error_code::kInjectedFailure, "injected failure")));
        return;
      }
      const StageResponse response = suite_->dispatch(req);
      int status = 200;
      if (response.error) {
        status = response.error->code == error_code::kInternal ? 500 : 400;
      }
      reply(res, status, to_json(response));
    });
  }
}

MockServer::~MockServer() { stop(); }

int MockServer::start() {
  auto& svr = impl_->server;
  port_ = options_.port == 0 ? svr.bind_to_any_port(options_.host) : (svr.bind_to_port(options_.host, options_.port) ? options_.port : -1);
  if (port_ <= 0) throw Error(ErrorKind::IoFailure, "cannot bind " + options_.host + ":" + std::to_string(options_.port));
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  while (!svr.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  return port_;
}

void MockServer::run() {
  auto& svr = impl_->server;
  port_ = options_.port == 0 ? svr.bind_to_any_port(options_.host) : (svr.bind_to_port(options_.host, options_.port) ? options_.port : -1);
  if (port_ <= 0) throw Error(ErrorKind::IoFailure, "cannot bind " + options_.host + ":" + std::to_string(options_.port));
  spdlog::info("mock stage server listening on {}", url());
  svr.listen_after_bind();
}

void MockServer::stop() {
  if (impl_) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockServer::url() const { return "http://" + options_.host + ":" + std::to_string(port_); }

}  // namespace speechstd
