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

#ifndef BINAUDIT_MOCK_ENDPOINT_HPP
#define BINAUDIT_MOCK_ENDPOINT_HPP

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "binaudit/core.hpp"

namespace binaudit::llm {

/// One scripted reply. `body` becomes the assistant message content of a
/// well-formed chat-completions response; non-2xx statuses return an error
/// payload instead.
struct ScriptedResponse {
    int status = 200;
    std::string body;
    int delay_ms = 0;
};

/// In-process chat-completions server that serves a fixed script in order and
/// records every request it receives. Once the script is exhausted it answers
/// HTTP 500 and raises the overrun flag.
class MockEndpoint {
  public:
    struct ReceivedRequest {
        std::string path;
        std::string body;
        TimestampMs timestamp;
        double elapsed_ms = 0.0;  // since server start, monotonic clock
    };

    explicit MockEndpoint(std::vector<ScriptedResponse> script);
    ~MockEndpoint();
    MockEndpoint(const MockEndpoint&) = delete;
    MockEndpoint& operator=(const MockEndpoint&) = delete;

    std::string base_url() const;
    int port() const;

    std::vector<ReceivedRequest> requests() const;
    std::size_t request_count() const;
    bool overrun() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace binaudit::llm

#endif  // BINAUDIT_MOCK_ENDPOINT_HPP
