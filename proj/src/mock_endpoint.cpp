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

#include "binaudit/mock_endpoint.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace binaudit::llm {

struct MockEndpoint::Impl {
    std::vector<ScriptedResponse> script;
    httplib::Server server;
    std::thread worker;
    int port = 0;

    mutable std::mutex mutex;
    std::vector<ReceivedRequest> received;
    std::size_t cursor = 0;
    bool overrun = false;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
};

namespace {

std::string completion_envelope(const std::string& content, std::size_t index) {
    nlohmann::json j = {
        {"id", "mock-" + std::to_string(index)},
        {"object", "chat.completion"},
        {"choices",
         {{{"index", 0},
           {"message", {{"role", "assistant"}, {"content", content}}},
           {"finish_reason", "stop"}}}},
    };
    return j.dump();
}

}  // namespace

MockEndpoint::MockEndpoint(std::vector<ScriptedResponse> script)
    : impl_(std::make_unique<Impl>()) {
    impl_->script = std::move(script);
    Impl* impl = impl_.get();

    impl->server.Post(".*", [impl](const httplib::Request& req, httplib::Response& res) {
        ScriptedResponse entry;
        std::size_t index = 0;
        {
            std::lock_guard<std::mutex> lock(impl->mutex);
            ReceivedRequest r;
            r.path = req.path;
            r.body = req.body;
            r.timestamp = now_utc_millis();
            r.elapsed_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - impl->started)
                               .count();
            impl->received.push_back(std::move(r));
            index = impl->cursor;
            if (impl->cursor < impl->script.size()) {
                entry = impl->script[impl->cursor++];
            } else {
                impl->overrun = true;
                entry.status = 500;
                entry.body = "mock script exhausted";
            }
        }
        if (entry.delay_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(entry.delay_ms));
        }
        res.status = entry.status;
        if (entry.status >= 200 && entry.status < 300) {
            res.set_content(completion_envelope(entry.body, index), "application/json");
        } else {
            nlohmann::json err = {{"error", {{"message", entry.body}}}};
            res.set_content(err.dump(), "application/json");
        }
    });

    impl->port = impl->server.bind_to_any_port("127.0.0.1");
    if (impl->port <= 0) {
        throw std::runtime_error("mock endpoint failed to bind a local port");
    }
    impl->worker = std::thread([impl] { impl->server.listen_after_bind(); });
    impl->server.wait_until_ready();
}

MockEndpoint::~MockEndpoint() {
    impl_->server.stop();
    if (impl_->worker.joinable()) {
        impl_->worker.join();
    }
}

std::string MockEndpoint::base_url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port);
}

int MockEndpoint::port() const {
    return impl_->port;
}

std::vector<MockEndpoint::ReceivedRequest> MockEndpoint::requests() const {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    return impl_->received;
}

std::size_t MockEndpoint::request_count() const {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    return impl_->received.size();
}

bool MockEndpoint::overrun() const {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    return impl_->overrun;
}

}  // namespace binaudit::llm
