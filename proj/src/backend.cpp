#include "fragkit/backend.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <semaphore>
#include <thread>

#include "fragkit/errors.hpp"
#include "httplib.h"
#include "json.hpp"

namespace fragkit {

std::string prefix_lines(std::string_view text, std::string_view prefix) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    out += prefix;
    if (nl == std::string_view::npos) {
      out += text.substr(pos);
      break;
    }
    out += text.substr(pos, nl + 1 - pos);
    pos = nl + 1;
  }
  return out;
}

MockBackend::MockBackend(MockTransform transform, std::string prefix)
    : transform_(transform), prefix_(std::move(prefix)) {}

std::string MockBackend::apply(std::string_view source) const {
  if (transform_ == MockTransform::identity) return std::string(source);
  return prefix_lines(source, prefix_);
}

std::string MockBackend::complete(const PromptPacket& packet) {
  return apply(packet.source_text);
}

std::string parse_chat_response(std::string_view body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) throw MalformedResponse("response is not JSON");
  if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() ||
      j["choices"].empty()) {
    throw MalformedResponse("response has no choices");
  }
  const auto& choice = j["choices"][0];
  std::string content;
  if (choice.contains("message") && choice["message"].is_object() &&
      choice["message"].contains("content") &&
      choice["message"]["content"].is_string()) {
    content = choice["message"]["content"].get<std::string>();
  } else if (choice.contains("text") && choice["text"].is_string()) {
    content = choice["text"].get<std::string>();
  } else {
    throw MalformedResponse("choice has no text");
  }

  if (const auto open = content.find("```"); open != std::string::npos) {
    auto start = content.find('\n', open);
    start = start == std::string::npos ? content.size() : start + 1;
    const auto close = content.find("```", start);
    content = content.substr(start, close == std::string::npos ? std::string::npos
                                                                : close - start);
    if (!content.empty() && content.back() == '\n') content.pop_back();
  }
  if (content.empty()) throw MalformedResponse("empty completion");
  return content;
}

struct HttpBackend::State {
  explicit State(std::size_t slots) : in_flight(static_cast<std::ptrdiff_t>(slots)) {}

  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix + /chat/completions
  std::counting_semaphore<4096> in_flight;
  std::mutex rate_mu;
  std::chrono::steady_clock::time_point next_slot{};
  std::atomic<std::size_t> sent{0};
  std::function<void(std::chrono::milliseconds)> sleeper = [](auto d) {
    std::this_thread::sleep_for(d);
  };
};

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)),
      state_(std::make_unique<State>(
          std::clamp<std::size_t>(config_.max_in_flight, 1, 4096))) {
  auto url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  const auto scheme = url.find("://");
  const auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  state_->origin = url.substr(0, slash);
  state_->path =
      (slash == std::string::npos ? std::string() : url.substr(slash)) +
      "/chat/completions";
}

HttpBackend::~HttpBackend() = default;

std::size_t HttpBackend::requests_sent() const { return state_->sent; }

void HttpBackend::set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) {
  state_->sleeper = std::move(sleeper);
}

std::string HttpBackend::complete(const PromptPacket& packet) {
  auto delay = config_.initial_backoff;
  for (std::size_t attempt_no = 0;; ++attempt_no) {
    try {
      return attempt(packet);
    } catch (const BackendError& e) {
      if (!e.retryable() || attempt_no >= config_.retries) throw;
    }
    state_->sleeper(delay);
    delay = std::min(delay * 2, config_.max_backoff);
  }
}

std::string HttpBackend::attempt(const PromptPacket& packet) {
  state_->in_flight.acquire();
  struct Release {
    State& s;
    ~Release() { s.in_flight.release(); }
  } release{*state_};

  if (config_.rps_limit > 0) {
    const auto gap = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / config_.rps_limit));
    std::chrono::steady_clock::time_point at;
    {
      std::lock_guard lock(state_->rate_mu);
      at = std::max(state_->next_slot, std::chrono::steady_clock::now());
      state_->next_slot = at + gap;
    }
    std::this_thread::sleep_until(at);
  }

  nlohmann::json body{
      {"model", config_.model},
      {"messages", nlohmann::json::array({{{"role", "user"},
                                           {"content", packet.prompt_text}}})},
      {"temperature", config_.temperature},
  };
  if (packet.budget.reserved_output > 0) {
    body["max_tokens"] = packet.budget.reserved_output;
  }

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  httplib::Client client(state_->origin);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);

  ++state_->sent;
  auto res = client.Post(state_->path, headers, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
      throw Timeout("request to " + state_->origin + " timed out");
    }
    throw BackendError("transport error: " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    throw HttpStatus(res->status, res->body.substr(0, 200));
  }
  return parse_chat_response(res->body);
}

std::string backend_call(Backend& backend, const PromptPacket& packet) {
  return backend.complete(packet);
}

}  // namespace fragkit
