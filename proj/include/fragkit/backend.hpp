#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "fragkit/translate.hpp"

namespace fragkit {

class Backend {
 public:
  virtual ~Backend() = default;
  /// Translated text for the packet. Must be safe to call concurrently.
  virtual std::string complete(const PromptPacket& packet) = 0;
};

enum class MockTransform { identity, line_prefix };

/// Pure function of the packet source: identity, or every line prefixed.
class MockBackend : public Backend {
 public:
  explicit MockBackend(MockTransform transform = MockTransform::identity,
                       std::string prefix = "// t: ");
  std::string complete(const PromptPacket& packet) override;
  std::string apply(std::string_view source) const;

 private:
  MockTransform transform_;
  std::string prefix_;
};

std::string prefix_lines(std::string_view text, std::string_view prefix);

struct HttpBackendConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8000/v1
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  std::size_t retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{8000};
  std::chrono::seconds timeout{120};
  std::size_t max_in_flight = 4;
  double rps_limit = 0;  // 0 = unlimited
  double temperature = 0;
};

/// Chat-completions client. Retries Timeout, 429, 5xx, transport failures
/// and malformed replies with exponential backoff.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  std::string complete(const PromptPacket& packet) override;

  /// Number of HTTP requests sent, retries included.
  std::size_t requests_sent() const;

  /// Replaces std::this_thread::sleep_for between retries (for tests).
  void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper);

 private:
  struct State;
  std::string attempt(const PromptPacket& packet);

  HttpBackendConfig config_;
  std::unique_ptr<State> state_;
};

/// Extracts choices[0].message.content (or choices[0].text) and strips a
/// surrounding markdown code fence. Throws MalformedResponse.
std::string parse_chat_response(std::string_view body);

std::string backend_call(Backend& backend, const PromptPacket& packet);

}  // namespace fragkit
