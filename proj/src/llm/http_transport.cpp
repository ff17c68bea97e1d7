#include <regex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ectfuzz/llm.hpp"

namespace ectfuzz::llm {

namespace {

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpTransport::HttpTransport(HttpOptions options) : options_(std::move(options)) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(options_.endpoint, m, url))
    throw std::invalid_argument("endpoint must be an http(s) URL: " + options_.endpoint);
  origin_ = m[1].str();
  base_path_ = m[2].matched ? m[2].str() : "";
  while (base_path_.ends_with('/')) base_path_.pop_back();
  if (options_.attempts < 1) options_.attempts = 1;
}

Response HttpTransport::complete(const Request& request) {
  nlohmann::json body{{"model", request.model}, {"temperature", request.temperature}};
  auto& messages = body["messages"] = nlohmann::json::array();
  if (!request.system.empty()) messages.push_back({{"role", "system"}, {"content", request.system}});
  messages.push_back({{"role", "user"}, {"content", request.user}});
  const auto payload = body.dump();

  httplib::Client client(origin_);
  const auto secs = options_.timeout.count() / 1000;
  const auto usecs = (options_.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

  std::string last = "no attempt made";
  bool timed_out = false;
  for (int attempt = 0; attempt < options_.attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(options_.backoff * (1 << (attempt - 1)));
    auto res = client.Post(base_path_ + "/chat/completions", headers, payload, "application/json");
    if (!res) {
      const auto err = res.error();
      timed_out = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout;
      last = httplib::to_string(err);
      continue;
    }
    timed_out = false;
    if (res->status == 200) {
      try {
        const auto reply = nlohmann::json::parse(res->body);
        return {reply.at("choices").at(0).at("message").at("content").get<std::string>()};
      } catch (const nlohmann::json::exception& e) {
        throw TransportError(res->status, std::string("malformed completion: ") + e.what());
      }
    }
    if (!retryable(res->status))
      throw TransportError(res->status, "HTTP " + std::to_string(res->status) + ": " + res->body);
    last = "HTTP " + std::to_string(res->status);
    if (attempt + 1 == options_.attempts) throw TransportError(res->status, last);
  }
  if (timed_out) throw TimeoutError("request timed out: " + last);
  throw TransportError(0, "request failed: " + last);
}

}  // namespace ectfuzz::llm
