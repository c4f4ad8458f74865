#pragma once

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <string>
#include <thread>
#include <utility>

#include "httplib.h"
#include "sdg/core/errors.hpp"
#include "sdg/core/types.hpp"
#include "sdg/policy/chat.hpp"
#include "sdg/policy/policy.hpp"

namespace sdg {

struct RemoteConfig {
    std::string base_url;  // scheme://host[:port]
    std::string model;
    std::string path = "/v1/chat/completions";
    std::string api_key_env = "SDG_API_KEY";
    int max_attempts = 3;  // total tries per request
    int backoff_ms = 0;    // linear backoff between retries
    int timeout_s = 30;
    std::string audit_path;  // JSONL request/response trace when set

    void validate() const {
        if (base_url.empty()) throw ConfigError("remote policy needs a base url");
        if (model.empty()) throw ConfigError("remote policy needs a model name");
        if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
    }
};

// Chat-completions client. Generation only: the scoring side of the pipeline
// always runs on a local policy, so can_score() stays false. The credential
// is read from the environment on every call and its absence fails before
// any socket is opened.
class RemotePolicy final : public TextPolicy {
  public:
    explicit RemotePolicy(RemoteConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

    std::string name() const override { return "remote-" + cfg_.model; }

    GenerationResult generate(const ChatPrompt& prompt, const GenerationSettings& settings) override {
        settings.validate();
        prompt.require_nonempty();
        const char* key = std::getenv(cfg_.api_key_env.c_str());
        if (key == nullptr || *key == '\0')
            throw AuthError("credential " + cfg_.api_key_env + " is not set");

        json body{{"model", cfg_.model},
                  {"messages", json::array()},
                  {"temperature", settings.temperature},
                  {"max_tokens", settings.max_tokens}};
        for (const auto& m : prompt.messages)
            body["messages"].push_back({{"role", to_string(m.source)}, {"content", m.text}});

        httplib::Client client(cfg_.base_url);
        client.set_connection_timeout(cfg_.timeout_s, 0);
        client.set_read_timeout(cfg_.timeout_s, 0);
        httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};

        int attempts = 0;
        for (;;) {
            ++attempts;
            auto res = client.Post(cfg_.path, headers, body.dump(), "application/json");
            int status = res ? res->status : 0;
            audit(body, status, res ? res->body : "");
            if (res && res->status == 200) return parse_completion(res->body, attempts);
            if (res && (res->status == 401 || res->status == 403))
                throw AuthError("endpoint rejected credential (status " + std::to_string(res->status) + ")");
            bool retryable = !res || res->status == 429 || res->status >= 500;
            if (!retryable) throw RemoteError("chat completion failed", status, attempts);
            if (attempts >= cfg_.max_attempts) {
                if (res && res->status == 429)
                    throw RetryExhausted("rate limited after " + std::to_string(attempts) + " attempts");
                throw RemoteError(res ? "server error" : "transport failure", status, attempts);
            }
            if (cfg_.backoff_ms > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(cfg_.backoff_ms) * attempts));
        }
    }

  private:
    GenerationResult parse_completion(const std::string& raw, int attempts) const {
        json j = json::parse(raw, nullptr, false);
        if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
            throw RemoteError("malformed completion body", 200, attempts);
        const json& choice = j["choices"][0];
        if (!choice.contains("message") || !choice["message"].contains("content") ||
            !choice["message"]["content"].is_string())
            throw RemoteError("completion body missing message content", 200, attempts);
        bool truncated = choice.value("finish_reason", "") == std::string("length");
        return {choice["message"]["content"].get<std::string>(), truncated};
    }

    void audit(const json& request, int status, const std::string& response) const {
        if (cfg_.audit_path.empty()) return;
        std::ofstream out(cfg_.audit_path, std::ios::app);
        out << json{{"request", request}, {"status", status}, {"response", response}}.dump() << "\n";
    }

    RemoteConfig cfg_;
};

}  // namespace sdg
