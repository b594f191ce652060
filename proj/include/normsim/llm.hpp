#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "normsim/jsonio.hpp"
#include "normsim/policy.hpp"
#include "normsim/prompt.hpp"

namespace normsim {

enum class ProviderKind { None, Mock, Remote };

std::string to_string(ProviderKind k);
ProviderKind provider_kind_from_string(const std::string& s);

struct ProviderConfig {
  std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
  std::string model_name = "gpt-4";
  double temperature = 0.1;
  int max_tokens = 10;
  std::string api_key_env_var = "OPENAI_API_KEY";
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;
  int max_concurrent = 4;               // per-provider in-flight cap
  std::chrono::milliseconds min_interval{0};  // spacing between request starts

  bool operator==(const ProviderConfig&) const = default;
};

/// One round trip to a provider, recorded verbatim even when the response is
/// unparseable.
struct ChatExchange {
  RenderedPrompt request;
  std::string model_name;
  double temperature = 0.0;
  int max_tokens = 0;
  std::string response_text;
  std::optional<int> prompt_tokens;
  std::optional<int> completion_tokens;
  std::chrono::milliseconds wall_time{0};
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual ChatExchange complete(const RenderedPrompt& prompt, const ProviderConfig& cfg) = 0;
};

/// Stable key for canned responses: fnv-1a over system + user text, hex.
std::string prompt_key(const RenderedPrompt& prompt);

/// Deterministic offline provider. Responses are looked up by prompt key;
/// a vector value is consumed one element per repeated identical prompt and
/// sticks at its last element. Unknown prompts get the default response.
class MockProvider : public ChatProvider {
 public:
  MockProvider() = default;
  MockProvider(std::map<std::string, std::vector<std::string>> by_key,
               std::string default_response);
  static MockProvider from_file(const std::string& path);
  static MockProvider from_json(const Json& j, const std::string& context);

  ChatExchange complete(const RenderedPrompt& prompt, const ProviderConfig& cfg) override;

 private:
  std::map<std::string, std::vector<std::string>> by_key_;
  std::string default_response_ = "Stop";
  std::map<std::string, std::size_t> cursor_;
  std::mutex mutex_;
};

/// Chat-completions client over HTTPS with bounded retries, monotone backoff,
/// a shared rate limiter and an in-flight cap. The API key is read from the
/// environment variable named in the config; a missing key raises AuthError
/// before any network activity.
class HttpProvider : public ChatProvider {
 public:
  HttpProvider();
  ~HttpProvider() override;

  ChatExchange complete(const RenderedPrompt& prompt, const ProviderConfig& cfg) override;

  /// Wire body: {model, temperature, max_tokens, messages:[system, user]}.
  static Json request_body(const RenderedPrompt& prompt, const ProviderConfig& cfg);

 private:
  struct Limiter;
  std::unique_ptr<Limiter> limiter_;
};

/// Backoff before retry `attempt` (0-based); monotone non-decreasing.
std::chrono::milliseconds backoff_delay(int attempt);

/// Case-insensitive whole-word scan for action keywords ("go", "stop",
/// "lane"/"change"/"switch"). Returns the action iff exactly one legal action
/// is matched; nullopt otherwise.
std::optional<Action> parse_action(std::string_view text, const std::vector<Action>& legal);

using ExchangeSink = std::function<void(const ChatExchange&)>;

/// Render -> complete -> parse with up to cfg.max_retries re-queries on
/// unparseable output. Only AuthError escapes; anything else degrades to a
/// Fallback Stop decision carrying the last raw text. Each exchange is handed
/// to `sink` before the decision is returned.
Decision decide_llm(const Observation& obs, const ScenarioSpec& spec,
                    const PromptTemplateSet& templates, const ProviderConfig& cfg,
                    ChatProvider& provider, const ExchangeSink& sink = {});

Json provider_config_to_json(const ProviderConfig& cfg);
ProviderConfig provider_config_from_json(const Json& j, const std::string& context);

}  // namespace normsim
