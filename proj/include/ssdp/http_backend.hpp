#pragma once

#include <map>
#include <memory>
#include <string>

#include "ssdp/backends.hpp"

namespace ssdp {

// OpenAI-compatible chat-completions endpoint description. `fixture_path`
// switches the backend to recorded fixtures (no network); otherwise requests
// go over HTTP to {base_url}/v1/chat/completions.
struct HttpEndpointConfig {
  std::string base_url = "http://127.0.0.1:8080";
  std::string model = "local-model";
  double temperature = 0.7;
  std::string stop = "\n";
  std::string terminal_pattern = "The answer is";
  std::string api_key_env = "OPENAI_API_KEY";  // bearer token source
  int max_attempts = 3;          // total tries per request
  int backoff_initial_ms = 250;  // doubles after each failed attempt
  int max_inflight = 8;          // concurrent request cap
  double timeout_s = 30.0;
  std::string fixture_path;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Transport seam so the backend logic (request building, retries, parsing)
// is testable without a live server.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  // POSTs a JSON body to the chat-completions route. Throws BackendError on
  // transport-level failure (no HTTP status available).
  virtual HttpResponse post_chat(const std::string& request_body) = 0;
};

// Real network transport over cpp-httplib. One client per call; safe for
// concurrent use.
std::shared_ptr<HttpTransport> make_httplib_transport(
    const HttpEndpointConfig& config);

// Replays recorded responses, matched by request hash. File format: one JSON
// object per line,
//   {"request_hash":"<hex>","status":200,"body":{...}}
// (an optional "request" field may hold the original body for reference).
// A request with no recorded response throws NotFoundError.
class FixtureTransport : public HttpTransport {
 public:
  explicit FixtureTransport(const std::string& fixture_path);
  HttpResponse post_chat(const std::string& request_body) override;

  // Serializes one fixture line (helper for producing fixture files).
  static std::string make_fixture_line(const std::string& request_body,
                                       int status,
                                       const std::string& response_body);

 private:
  std::map<std::string, HttpResponse> by_hash_;
};

// Canonical request body for expanding `path` into b candidates: fields
// model, messages, temperature, n, stop. Deterministic for fixture hashing.
std::string build_chat_request(const HttpEndpointConfig& config,
                               const std::vector<std::string>& path, int b);

// FNV-1a 64-bit hash of the canonical request body, lowercase hex.
std::string request_hash(const std::string& request_body);

// Generation backend over an OpenAI-compatible server. One expand call
// issues a single request with n = b sampled completions; each returned
// message is truncated at the stop sequence and marked terminal when it
// contains the terminal pattern. Non-2xx responses are retried with
// exponential backoff up to max_attempts, then raise BackendError; malformed
// response bodies raise ProtocolError without retry.
class HttpGeneratorBackend : public GeneratorBackend {
 public:
  explicit HttpGeneratorBackend(HttpEndpointConfig config,
                                std::shared_ptr<HttpTransport> transport = nullptr);

  std::vector<Candidate> expand(const std::vector<std::string>& path, int b,
                                std::uint64_t seed) override;
  // Matches on the text after the terminal pattern (falling back to a
  // whole-string comparison when the expected answer has no pattern).
  bool answers_match(const std::string& answer,
                     const std::string& expected) const override;

  const HttpEndpointConfig& config() const { return config_; }

 private:
  HttpEndpointConfig config_;
  std::shared_ptr<HttpTransport> transport_;
};

}  // namespace ssdp
