#include "normsim/llm.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "normsim/errors.hpp"

namespace normsim {

std::string to_string(ProviderKind k) {
  switch (k) {
    case ProviderKind::None: return "none";
    case ProviderKind::Mock: return "mock";
    case ProviderKind::Remote: return "remote";
  }
  return "none";
}

ProviderKind provider_kind_from_string(const std::string& s) {
  if (s == "none") return ProviderKind::None;
  if (s == "mock") return ProviderKind::Mock;
  if (s == "remote") return ProviderKind::Remote;
  throw ConfigError("ConfigError: unknown provider type '" + s + "'");
}

std::string prompt_key(const RenderedPrompt& prompt) {
  // fnv-1a 64 over system \x1e user
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  mix(prompt.system_message);
  mix("\x1e");
  mix(prompt.user_message);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

MockProvider::MockProvider(std::map<std::string, std::vector<std::string>> by_key,
                           std::string default_response)
    : by_key_(std::move(by_key)), default_response_(std::move(default_response)) {}

MockProvider MockProvider::from_json(const Json& j, const std::string& context) {
  expect_fields(j, {"default", "by_key"}, context);
  std::map<std::string, std::vector<std::string>> by_key;
  std::string def = "Stop";
  if (j.contains("default")) def = j["default"].get<std::string>();
  if (j.contains("by_key")) {
    for (auto it = j["by_key"].begin(); it != j["by_key"].end(); ++it) {
      if (it.value().is_string()) {
        by_key[it.key()] = {it.value().get<std::string>()};
      } else {
        by_key[it.key()] = it.value().get<std::vector<std::string>>();
      }
    }
  }
  return MockProvider(std::move(by_key), std::move(def));
}

MockProvider MockProvider::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("ConfigError: cannot open mock responses file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("ConfigError: bad mock responses file '" + path + "': " + e.what());
  }
  return from_json(j, "mock responses file");
}

ChatExchange MockProvider::complete(const RenderedPrompt& prompt, const ProviderConfig& cfg) {
  const std::string key = prompt_key(prompt);
  std::string response;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = by_key_.find(key);
    if (it == by_key_.end() || it->second.empty()) {
      response = default_response_;
    } else {
      std::size_t& cursor = cursor_[key];
      response = it->second[std::min(cursor, it->second.size() - 1)];
      ++cursor;
    }
  }
  ChatExchange ex;
  ex.request = prompt;
  ex.model_name = cfg.model_name;
  ex.temperature = cfg.temperature;
  ex.max_tokens = cfg.max_tokens;
  ex.response_text = response;
  ex.wall_time = std::chrono::milliseconds{0};  // keeps mock logs byte-reproducible
  return ex;
}

std::chrono::milliseconds backoff_delay(int attempt) {
  return std::chrono::milliseconds{250 * (attempt + 1)};
}

// Shared per-provider throttle: caps in-flight requests and spaces out
// request starts.
struct HttpProvider::Limiter {
  std::mutex mutex;
  std::condition_variable cv;
  int in_flight = 0;
  std::chrono::steady_clock::time_point last_start{};

  void acquire(const ProviderConfig& cfg) {
    std::unique_lock<std::mutex> lock(mutex);
    cv.wait(lock, [&] { return in_flight < std::max(1, cfg.max_concurrent); });
    ++in_flight;
    if (cfg.min_interval.count() > 0) {
      auto now = std::chrono::steady_clock::now();
      auto earliest = last_start + cfg.min_interval;
      if (now < earliest) {
        lock.unlock();
        std::this_thread::sleep_until(earliest);
        lock.lock();
      }
    }
    last_start = std::chrono::steady_clock::now();
  }

  void release() {
    {
      std::lock_guard<std::mutex> lock(mutex);
      --in_flight;
    }
    cv.notify_one();
  }
};

HttpProvider::HttpProvider() : limiter_(std::make_unique<Limiter>()) {}
HttpProvider::~HttpProvider() = default;

Json HttpProvider::request_body(const RenderedPrompt& prompt, const ProviderConfig& cfg) {
  Json body;
  body["model"] = cfg.model_name;
  body["temperature"] = cfg.temperature;
  body["max_tokens"] = cfg.max_tokens;
  body["messages"] = Json::array({
      Json{{"role", "system"}, {"content", prompt.system_message}},
      Json{{"role", "user"}, {"content", prompt.user_message}},
  });
  return body;
}

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("ConfigError: endpoint_url must include a scheme: '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {url, "/v1/chat/completions"};
  }
  return {url.substr(0, path_start), url.substr(path_start)};
}

ChatExchange one_request(const RenderedPrompt& prompt, const ProviderConfig& cfg,
                         const std::string& api_key) {
  const ParsedUrl url = split_url(cfg.endpoint_url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url.origin.rfind("https://", 0) == 0) {
    throw NetworkError("NetworkError: built without TLS support, cannot reach " + url.origin);
  }
#endif
  httplib::Client client(url.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
  client.set_connection_timeout(std::max<long>(1, secs.count()), 0);
  client.set_read_timeout(std::max<long>(1, secs.count()), 0);
  client.set_write_timeout(std::max<long>(1, secs.count()), 0);

  httplib::Headers headers = {{"Authorization", "Bearer " + api_key}};
  const std::string body = HttpProvider::request_body(prompt, cfg).dump();

  const auto started = std::chrono::steady_clock::now();
  auto result = client.Post(url.path, headers, body, "application/json");
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);

  if (!result) {
    const auto err = result.error();
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
        err == httplib::Error::Write) {
      throw TimeoutError("TimeoutError: request to " + url.origin + " timed out");
    }
    throw NetworkError("NetworkError: request to " + url.origin + " failed (" +
                       httplib::to_string(err) + ")");
  }
  if (result->status == 401 || result->status == 403) {
    throw AuthError("AuthError: provider rejected the API key (HTTP " +
                    std::to_string(result->status) + ")");
  }
  if (result->status == 429) {
    throw RateLimited("RateLimited: provider returned HTTP 429");
  }
  if (result->status < 200 || result->status >= 300) {
    throw NetworkError("NetworkError: provider returned HTTP " + std::to_string(result->status));
  }

  Json parsed;
  try {
    parsed = Json::parse(result->body);
  } catch (const std::exception&) {
    throw NetworkError("NetworkError: provider returned a non-JSON body");
  }

  ChatExchange ex;
  ex.request = prompt;
  ex.model_name = cfg.model_name;
  ex.temperature = cfg.temperature;
  ex.max_tokens = cfg.max_tokens;
  ex.wall_time = elapsed;
  try {
    ex.response_text = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const std::exception&) {
    throw NetworkError("NetworkError: provider response is missing choices[0].message.content");
  }
  if (parsed.contains("usage")) {
    const Json& usage = parsed["usage"];
    if (usage.contains("prompt_tokens")) ex.prompt_tokens = usage["prompt_tokens"].get<int>();
    if (usage.contains("completion_tokens")) {
      ex.completion_tokens = usage["completion_tokens"].get<int>();
    }
  }
  return ex;
}

}  // namespace

ChatExchange HttpProvider::complete(const RenderedPrompt& prompt, const ProviderConfig& cfg) {
  const char* key = cfg.api_key_env_var.empty() ? nullptr : std::getenv(cfg.api_key_env_var.c_str());
  if (!key || !*key) {
    throw AuthError("AuthError: environment variable " + cfg.api_key_env_var + " is not set");
  }

  for (int attempt = 0;; ++attempt) {
    limiter_->acquire(cfg);
    try {
      ChatExchange ex = one_request(prompt, cfg, key);
      limiter_->release();
      return ex;
    } catch (const AuthError&) {
      limiter_->release();
      throw;
    } catch (const Error&) {
      limiter_->release();
      if (attempt >= cfg.max_retries) throw;
      std::this_thread::sleep_for(backoff_delay(attempt));
    }
  }
}

std::optional<Action> parse_action(std::string_view text, const std::vector<Action>& legal) {
  // whole-word, case-insensitive keyword scan
  bool has_go = false;
  bool has_stop = false;
  bool has_lane = false;
  std::string word;
  auto flush = [&] {
    if (word == "go") has_go = true;
    if (word == "stop") has_stop = true;
    if (word == "lane" || word == "lanes" || word == "change" || word == "switch") {
      has_lane = true;
    }
    word.clear();
  };
  for (char c : text) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      flush();
    }
  }
  flush();

  std::vector<Action> matched;
  for (Action a : legal) {
    const bool hit = (a == Action::Go && has_go) || (a == Action::Stop && has_stop) ||
                     (a == Action::LaneChange && has_lane);
    if (hit) matched.push_back(a);
  }
  if (matched.size() == 1) return matched.front();
  return std::nullopt;
}

Decision decide_llm(const Observation& obs, const ScenarioSpec& spec,
                    const PromptTemplateSet& templates, const ProviderConfig& cfg,
                    ChatProvider& provider, const ExchangeSink& sink) {
  const RenderedPrompt prompt = render_prompt(spec, obs, templates);
  std::string last_raw;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    ChatExchange ex;
    try {
      ex = provider.complete(prompt, cfg);
    } catch (const AuthError&) {
      throw;
    } catch (const Error& e) {
      last_raw = e.what();
      continue;
    }
    if (sink) sink(ex);
    last_raw = ex.response_text;
    if (auto action = parse_action(ex.response_text, obs.legal)) {
      Decision d{*action, DecisionSource::Llm};
      d.raw_response = ex.response_text;
      d.latency = ex.wall_time;
      return d;
    }
  }
  Decision d{Action::Stop, DecisionSource::Fallback};
  d.raw_response = last_raw;
  return d;
}

Json provider_config_to_json(const ProviderConfig& cfg) {
  Json j;
  j["endpoint_url"] = cfg.endpoint_url;
  j["model_name"] = cfg.model_name;
  j["temperature"] = cfg.temperature;
  j["max_tokens"] = cfg.max_tokens;
  j["api_key_env_var"] = cfg.api_key_env_var;
  j["timeout_ms"] = cfg.timeout.count();
  j["max_retries"] = cfg.max_retries;
  j["max_concurrent"] = cfg.max_concurrent;
  j["min_interval_ms"] = cfg.min_interval.count();
  return j;
}

ProviderConfig provider_config_from_json(const Json& j, const std::string& context) {
  expect_fields(j,
                {"endpoint_url", "model_name", "temperature", "max_tokens", "api_key_env_var",
                 "timeout_ms", "max_retries", "max_concurrent", "min_interval_ms"},
                context);
  ProviderConfig cfg;
  if (j.contains("endpoint_url")) cfg.endpoint_url = j["endpoint_url"].get<std::string>();
  if (j.contains("model_name")) cfg.model_name = j["model_name"].get<std::string>();
  if (j.contains("temperature")) cfg.temperature = j["temperature"].get<double>();
  if (j.contains("max_tokens")) cfg.max_tokens = j["max_tokens"].get<int>();
  if (j.contains("api_key_env_var")) cfg.api_key_env_var = j["api_key_env_var"].get<std::string>();
  if (j.contains("timeout_ms")) cfg.timeout = std::chrono::milliseconds{j["timeout_ms"].get<long>()};
  if (j.contains("max_retries")) cfg.max_retries = j["max_retries"].get<int>();
  if (j.contains("max_concurrent")) cfg.max_concurrent = j["max_concurrent"].get<int>();
  if (j.contains("min_interval_ms")) {
    cfg.min_interval = std::chrono::milliseconds{j["min_interval_ms"].get<long>()};
  }
  if (cfg.temperature < 0) throw ConfigError("ConfigError: temperature must be >= 0");
  if (cfg.max_tokens <= 0) throw ConfigError("ConfigError: max_tokens must be > 0");
  if (cfg.max_retries < 0) throw ConfigError("ConfigError: max_retries must be >= 0");
  return cfg;
}

}  // namespace normsim
