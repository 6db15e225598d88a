#include "reactree/remote_policy.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "reactree/errors.hpp"

namespace reactree {

namespace {

using nlohmann::json;

std::string env_or(const char* name, const char* fallback) {
    const char* value = std::getenv(name);
    return value ? value : fallback;
}

}  // namespace

RemoteConfig RemoteConfig::from_env() {
    RemoteConfig config;
    config.base_url = env_or("REACTREE_ENDPOINT", "");
    config.model = env_or("REACTREE_MODEL", "");
    config.api_key = env_or("REACTREE_API_KEY", "");
    if (config.base_url.empty()) {
        throw ConfigError("remote policy needs REACTREE_ENDPOINT");
    }
    if (config.model.empty()) {
        throw ConfigError("remote policy needs REACTREE_MODEL");
    }
    return config;
}

struct RemotePolicy::Impl {
    RemoteConfig config;
    httplib::Client client;

    explicit Impl(RemoteConfig cfg) : config(std::move(cfg)), client(config.base_url) {
        client.set_connection_timeout(config.timeout_seconds, 0);
        client.set_read_timeout(config.timeout_seconds, 0);
    }
};

RemotePolicy::RemotePolicy(RemoteConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
    if (impl_->config.attempts < 1) throw ConfigError("remote policy needs at least one attempt");
}

RemotePolicy::~RemotePolicy() = default;

std::string RemotePolicy::next_line(const PromptBundle& prompt, const PolicyQuery&) {
    const json body = {{"model", impl_->config.model},
                       {"messages",
                        {{{"role", "system"}, {"content", prompt.system_text}},
                         {{"role", "user"}, {"content", render_user_text(prompt)}}}},
                       {"temperature", impl_->config.temperature},
                       {"max_tokens", impl_->config.max_output_tokens},
                       {"stop", {"\n"}}};

    httplib::Headers headers;
    if (!impl_->config.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + impl_->config.api_key);
    }

    std::string last_error;
    int backoff_ms = impl_->config.initial_backoff_ms;
    for (int attempt = 0; attempt < impl_->config.attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
        auto response =
            impl_->client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
        if (!response) {
            last_error = "no response (" + httplib::to_string(response.error()) + ")";
            continue;
        }
        if (response->status != 200) {
            last_error = "status " + std::to_string(response->status);
            continue;
        }
        try {
            const json reply = json::parse(response->body);
            std::string content =
                reply.at("choices").at(0).at("message").at("content").get<std::string>();
            const auto newline = content.find('\n');
            if (newline != std::string::npos) content.erase(newline);
            return content;
        } catch (const json::exception& e) {
            last_error = std::string("malformed response: ") + e.what();
        }
    }
    throw TransportError("endpoint '" + impl_->config.base_url + "' failed after " +
                         std::to_string(impl_->config.attempts) + " attempts: " + last_error);
}

}  // namespace reactree
