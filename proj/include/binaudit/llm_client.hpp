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

#ifndef BINAUDIT_LLM_CLIENT_HPP
#define BINAUDIT_LLM_CLIENT_HPP

#include <optional>
#include <stdexcept>
#include <string>

namespace binaudit::llm {

/// Connection settings for a chat-completions-compatible HTTP endpoint.
/// API keys are taken from the named environment variable only; they never
/// appear in config files, flags, or transcripts.
struct EndpointConfig {
    std::string base_url;  // e.g. "https://api.openai.com/v1"
    std::string model_id;
    std::string api_key_env_var = "LLM_API_KEY";
    int timeout_ms = 30000;
    int max_retries = 3;  // <= 10
    int retry_backoff_base_ms = 500;
    /// No system message is sent unless one is configured here.
    std::optional<std::string> system_message;

    void validate() const;
};

struct CompletionRequest {
    std::string prompt_text;
    double temperature = 1.0;   // [0, 2]; checked before any network call
    int max_output_tokens = 16;
};

struct CompletionResult {
    std::string raw_text;  // first choice's message content, verbatim
    double latency_ms = 0.0;
};

/// Local misconfiguration: bad settings, missing API key, invalid request.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Network-level failure after retries are exhausted.
class TransportError : public std::runtime_error {
  public:
    TransportError(const std::string& message, int last_status)
        : std::runtime_error(message), last_status_(last_status) {}
    /// Last HTTP status observed; 0 when the connection itself failed.
    int last_status() const { return last_status_; }

  private:
    int last_status_;
};

/// Sends one chat-completion request with a single user message and returns
/// the first choice's content verbatim plus wall-clock latency. Transient
/// failures (connection errors, HTTP 429/5xx) are retried with exponential
/// backoff up to max_retries.
CompletionResult complete(const EndpointConfig& config, const CompletionRequest& request);

}  // namespace binaudit::llm

#endif  // BINAUDIT_LLM_CLIENT_HPP
