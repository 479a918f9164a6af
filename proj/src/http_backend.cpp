#include "ssdp/http_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include "ssdp/hash.hpp"
#include <json.hpp>

namespace ssdp {

using nlohmann::ordered_json;

namespace {

constexpr const char* kChatRoute = "/v1/chat/completions";

class HttplibTransport : public HttpTransport {
 public:
  explicit HttplibTransport(const HttpEndpointConfig& config)
      : config_(config), inflight_(config.max_inflight) {}

  HttpResponse post_chat(const std::string& request_body) override {
    inflight_.acquire();
    struct Release {
      std::counting_semaphore<>& sem;
      ~Release() { sem.release(); }
    } release{inflight_};

    httplib::Client client(config_.base_url);
    client.set_connection_timeout(std::chrono::duration<double>(config_.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(config_.timeout_s));
    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
      if (const char* key = std::getenv(config_.api_key_env.c_str())) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
      }
    }
    auto res = client.Post(kChatRoute, headers, request_body, "application/json");
    if (!res) {
      throw BackendError("http transport failure: " +
                         httplib::to_string(res.error()));
    }
    return {res->status, res->body};
  }

 private:
  HttpEndpointConfig config_;
  std::counting_semaphore<> inflight_;
};

}  // namespace

std::shared_ptr<HttpTransport> make_httplib_transport(
    const HttpEndpointConfig& config) {
  return std::make_shared<HttplibTransport>(config);
}

FixtureTransport::FixtureTransport(const std::string& fixture_path) {
  std::ifstream f(fixture_path);
  if (!f) throw IoError("cannot open fixture file: " + fixture_path);
  std::string line;
  size_t line_no = 0;
  while (std::getline(f, line)) {
    line_no += 1;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("fixture line " + std::to_string(line_no) + ": " +
                       e.what());
    }
    if (!j.is_object() || !j.contains("request_hash") || !j.contains("status") ||
        !j.contains("body")) {
      throw ParseError("fixture line " + std::to_string(line_no) +
                       ": needs request_hash, status, body");
    }
    HttpResponse resp;
    resp.status = j.at("status").get<int>();
    resp.body = j.at("body").is_string() ? j.at("body").get<std::string>()
                                         : j.at("body").dump();
    by_hash_[j.at("request_hash").get<std::string>()] = std::move(resp);
  }
}

HttpResponse FixtureTransport::post_chat(const std::string& request_body) {
  const auto it = by_hash_.find(request_hash(request_body));
  if (it == by_hash_.end()) {
    throw NotFoundError("no fixture recorded for request: " + request_body);
  }
  return it->second;
}

std::string FixtureTransport::make_fixture_line(const std::string& request_body,
                                                int status,
                                                const std::string& response_body) {
  ordered_json j;
  j["request_hash"] = request_hash(request_body);
  j["status"] = status;
  j["body"] = ordered_json::parse(response_body);
  j["request"] = ordered_json::parse(request_body);
  return j.dump();
}

std::string build_chat_request(const HttpEndpointConfig& config,
                               const std::vector<std::string>& path, int b) {
  if (path.empty()) {
    throw InvalidInputError("build_chat_request: path must include the root");
  }
  if (b < 1) throw InvalidInputError("build_chat_request: b must be >= 1");
  std::string prompt;
  for (size_t i = 0; i < path.size(); ++i) {
    if (i) prompt += '\n';
    prompt += path[i];
  }
  ordered_json j;
  j["model"] = config.model;
  j["messages"] = ordered_json::array(
      {{{"role", "system"},
        {"content",
         "Solve the problem step by step. Reply with exactly one next step; "
         "when it is the final step, include \"" + config.terminal_pattern +
             "\" followed by the answer."}},
       {{"role", "user"}, {"content", prompt}}});
  j["temperature"] = config.temperature;
  j["n"] = b;
  j["stop"] = ordered_json::array({config.stop});
  return j.dump();
}

std::string request_hash(const std::string& request_body) {
  return hex_digits(fnv1a64(request_body), 16);
}

HttpGeneratorBackend::HttpGeneratorBackend(HttpEndpointConfig config,
                                           std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  if (config_.max_attempts < 1) {
    throw InvalidInputError("http backend: max_attempts must be >= 1");
  }
  if (!transport_) {
    transport_ = config_.fixture_path.empty()
                     ? make_httplib_transport(config_)
                     : std::make_shared<FixtureTransport>(config_.fixture_path);
  }
}

std::vector<Candidate> HttpGeneratorBackend::expand(
    const std::vector<std::string>& path, int b, std::uint64_t) {
  const std::string request = build_chat_request(config_, path, b);

  HttpResponse response;
  std::string last_failure;
  bool got_response = false;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (attempt > 1 && config_.backoff_initial_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(
          config_.backoff_initial_ms << (attempt - 2)));
    }
    try {
      response = transport_->post_chat(request);
    } catch (const BackendError& e) {
      last_failure = e.what();
      continue;
    }
    if (response.status >= 200 && response.status < 300) {
      got_response = true;
      break;
    }
    last_failure = "http status " + std::to_string(response.status);
  }
  if (!got_response) {
    throw BackendError("chat completion failed after " +
                       std::to_string(config_.max_attempts) +
                       " attempts: " + last_failure);
  }

  ordered_json j;
  try {
    j = ordered_json::parse(response.body);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed completion response: ") +
                        e.what());
  }
  if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() ||
      j["choices"].empty()) {
    throw ProtocolError("completion response has no choices");
  }
  std::vector<Candidate> out;
  for (const auto& choice : j["choices"]) {
    if (!choice.is_object() || !choice.contains("message") ||
        !choice["message"].is_object() ||
        !choice["message"].contains("content") ||
        !choice["message"]["content"].is_string()) {
      throw ProtocolError("completion choice lacks message content");
    }
    std::string text = choice["message"]["content"].get<std::string>();
    if (!config_.stop.empty()) {
      const size_t cut = text.find(config_.stop);
      if (cut != std::string::npos) text.resize(cut);
    }
    Candidate c;
    c.terminal = text.find(config_.terminal_pattern) != std::string::npos;
    c.text = std::move(text);
    c.cost_s = 0.0;  // HTTP runs use the wall clock
    out.push_back(std::move(c));
  }
  return out;
}

bool HttpGeneratorBackend::answers_match(const std::string& answer,
                                         const std::string& expected) const {
  const auto tail = answer_tail(answer, config_.terminal_pattern);
  if (!tail) return false;
  const auto expected_tail = answer_tail(expected, config_.terminal_pattern);
  if (expected_tail) return *tail == *expected_tail;
  auto trim = [](const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    size_t b = s.find_last_not_of(" \t\r\n.!");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  return *tail == trim(expected);
}

}  // namespace ssdp
