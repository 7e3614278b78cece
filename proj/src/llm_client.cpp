// Copyright 2026 The BinAudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "binaudit/llm_client.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace binaudit::llm {

namespace {

struct SplitUrl {
    std::string host_part;    // scheme://host[:port]
    std::string path_prefix;  // leading path, no trailing slash
};

SplitUrl split_base_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("base_url '" + base_url + "' must include a scheme (http:// or https://)");
    }
    const auto path_start = base_url.find('/', scheme_end + 3);
    SplitUrl split;
    if (path_start == std::string::npos) {
        split.host_part = base_url;
    } else {
        split.host_part = base_url.substr(0, path_start);
        split.path_prefix = base_url.substr(path_start);
    }
    while (!split.path_prefix.empty() && split.path_prefix.back() == '/') {
        split.path_prefix.pop_back();
    }
    return split;
}

bool is_transient_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

void EndpointConfig::validate() const {
    if (base_url.empty()) {
        throw ConfigError("base_url must not be empty");
    }
    if (timeout_ms <= 0) {
        throw ConfigError("timeout_ms must be positive");
    }
    if (max_retries < 0 || max_retries > 10) {
        throw ConfigError("max_retries must be within [0, 10]");
    }
    if (retry_backoff_base_ms < 0) {
        throw ConfigError("retry_backoff_base_ms must be non-negative");
    }
}

CompletionResult complete(const EndpointConfig& config, const CompletionRequest& request) {
    // Local validation happens before anything touches the network.
    config.validate();
    if (!(request.temperature >= 0.0 && request.temperature <= 2.0)) {
        throw ConfigError("temperature " + std::to_string(request.temperature) +
                          " outside [0, 2]; no request sent");
    }
    if (request.max_output_tokens <= 0) {
        throw ConfigError("max_output_tokens must be positive");
    }
    const char* key = std::getenv(config.api_key_env_var.c_str());
    if (key == nullptr || *key == '\0') {
        throw ConfigError("API key environment variable '" + config.api_key_env_var +
                          "' is not set");
    }

    const SplitUrl url = split_base_url(config.base_url);
    httplib::Client client(url.host_part);
    client.set_connection_timeout(std::chrono::milliseconds(config.timeout_ms));
    client.set_read_timeout(std::chrono::milliseconds(config.timeout_ms));
    client.set_write_timeout(std::chrono::milliseconds(config.timeout_ms));
    client.set_bearer_token_auth(key);

    nlohmann::json messages = nlohmann::json::array();
    if (config.system_message) {
        messages.push_back({{"role", "system"}, {"content", *config.system_message}});
    }
    messages.push_back({{"role", "user"}, {"content", request.prompt_text}});
    nlohmann::json body = {
        {"model", config.model_id},
        {"messages", std::move(messages)},
        {"temperature", request.temperature},
        {"max_tokens", request.max_output_tokens},
    };
    const std::string payload = body.dump();
    const std::string path = url.path_prefix + "/chat/completions";

    const auto started = std::chrono::steady_clock::now();
    int last_status = 0;
    std::string last_error;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) {
            // Exponential backoff: base, 2*base, 4*base, ...
            const auto delay =
                std::chrono::milliseconds(config.retry_backoff_base_ms) * (1LL << (attempt - 1));
            std::this_thread::sleep_for(delay);
        }
        httplib::Result res = client.Post(path, payload, "application/json");
        if (!res) {
            last_status = 0;
            last_error = "connection error: " + httplib::to_string(res.error());
            continue;
        }
        last_status = res->status;
        if (is_transient_status(res->status)) {
            last_error = "transient HTTP status " + std::to_string(res->status);
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            throw TransportError("endpoint returned HTTP " + std::to_string(res->status) + ": " +
                                     res->body,
                                 res->status);
        }
        nlohmann::json reply;
        try {
            reply = nlohmann::json::parse(res->body);
        } catch (const std::exception& e) {
            throw TransportError(std::string("malformed response JSON: ") + e.what(), res->status);
        }
        try {
            CompletionResult result;
            result.raw_text = reply.at("choices").at(0).at("message").at("content")
                                  .get<std::string>();
            const auto elapsed = std::chrono::steady_clock::now() - started;
            result.latency_ms =
                std::chrono::duration<double, std::milli>(elapsed).count();
            return result;
        } catch (const std::exception& e) {
            throw TransportError(std::string("response missing choices[0].message.content: ") +
                                     e.what(),
                                 res->status);
        }
    }
    throw TransportError("retries exhausted after " + std::to_string(config.max_retries + 1) +
                             " attempts; last failure: " + last_error,
                         last_status);
}

}  // namespace binaudit::llm
