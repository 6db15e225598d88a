#pragma once

#include <memory>
#include <string>

#include "reactree/policy.hpp"

namespace reactree {

// Connection settings for an OpenAI-style chat-completion endpoint.
struct RemoteConfig {
    std::string base_url;  // e.g. "http://127.0.0.1:8000"
    std::string model;
    std::string api_key;  // optional bearer token
    double temperature = 0.0;
    int max_output_tokens = 128;
    int attempts = 3;           // transport attempts per request
    int initial_backoff_ms = 250;  // doubled after each failed attempt
    int timeout_seconds = 120;

    // Reads REACTREE_ENDPOINT, REACTREE_MODEL, and REACTREE_API_KEY.
    // Throws ConfigError when the endpoint or model is missing.
    static RemoteConfig from_env();
};

// Queries the endpoint with the rendered prompt as a system plus user
// message pair, greedy decoding, newline stop. Each instance owns its own
// connection, so concurrent episodes use separate RemotePolicy objects.
class RemotePolicy final : public Policy {
public:
    explicit RemotePolicy(RemoteConfig config);
    ~RemotePolicy() override;

    RemotePolicy(const RemotePolicy&) = delete;
    RemotePolicy& operator=(const RemotePolicy&) = delete;

    std::string next_line(const PromptBundle& prompt, const PolicyQuery& query) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace reactree
