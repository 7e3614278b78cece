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

#include "binaudit/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace binaudit::experiment {

namespace {

using nlohmann::json;

std::string format_temperature(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", t);
    return buf;
}

std::string replace_all(std::string text, const std::string& needle,
                        const std::string& replacement) {
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), replacement);
        pos += replacement.size();
    }
    return text;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& preferred,
                           const std::optional<std::uint64_t>& fallback) {
    if (preferred) return *preferred;
    if (fallback) return *fallback;
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

class LiveSource final : public DecisionSource {
  public:
    explicit LiveSource(llm::EndpointConfig endpoint) : endpoint_(std::move(endpoint)) {}

    Reply invoke(const std::string&, const std::string& prompt_text, double temperature,
                 int max_output_tokens, int) override {
        llm::CompletionRequest request;
        request.prompt_text = prompt_text;
        request.temperature = temperature;
        request.max_output_tokens = max_output_tokens;
        const llm::CompletionResult result = llm::complete(endpoint_, request);
        return Reply{result.raw_text, result.latency_ms};
    }

  private:
    llm::EndpointConfig endpoint_;
};

class BoltzmannSource final : public DecisionSource {
  public:
    BoltzmannSource(sources::BoltzmannSpec spec, std::uint64_t seed)
        : spec_(std::move(spec)), rng_(seed) {}

    Reply invoke(const std::string&, const std::string&, double temperature, int,
                 int expected_samples) override {
        // The request temperature drives the softmax so sweeps reach the
        // synthetic source; T = 0 uses the limit distribution (uniform over
        // the argmax set).
        const double p_yes = yes_probability(temperature);
        std::string text;
        for (int i = 0; i < expected_samples; ++i) {
            if (i > 0) text += ", ";
            text += rng_.bernoulli(p_yes) ? "yes" : "no";
        }
        return Reply{std::move(text), 0.0};
    }

  private:
    double yes_probability(double temperature) const {
        if (temperature > 0.0) {
            return sources::boltzmann_probability(spec_.logits, temperature)[0];
        }
        const double top = *std::max_element(spec_.logits.begin(), spec_.logits.end());
        std::size_t ties = 0;
        for (double z : spec_.logits) ties += z == top;
        return spec_.logits[0] == top ? 1.0 / static_cast<double>(ties) : 0.0;
    }

    sources::BoltzmannSpec spec_;
    sources::Xoshiro256ss rng_;
};

class MarkovSource final : public DecisionSource {
  public:
    MarkovSource(sources::MarkovChainSpec spec, std::uint64_t seed)
        : spec_(spec), rng_(seed) {}

    Reply invoke(const std::string& prompt_id, const std::string&, double, int,
                 int expected_samples) override {
        std::string text;
        if (expected_samples == 1) {
            // One-shot: the chain advances along each prompt's own stream.
            auto& last = chain_state_[prompt_id];
            const Decision d = step(last);
            last = d;
            text = to_string(d);
        } else {
            // Few-shot: each batch is a fresh run of the chain.
            std::optional<Decision> last;
            for (int i = 0; i < expected_samples; ++i) {
                if (i > 0) text += ", ";
                const Decision d = step(last);
                last = d;
                text += to_string(d);
            }
        }
        return Reply{std::move(text), 0.0};
    }

  private:
    Decision step(const std::optional<Decision>& last) {
        const double p = !last            ? spec_.p_initial_yes
                         : *last == Decision::Yes ? spec_.p_yes_given_yes
                                                  : spec_.p_yes_given_no;
        return rng_.bernoulli(p) ? Decision::Yes : Decision::No;
    }

    sources::MarkovChainSpec spec_;
    sources::Xoshiro256ss rng_;
    std::map<std::string, std::optional<Decision>> chain_state_;
};

class ReplaySource final : public DecisionSource {
  public:
    explicit ReplaySource(const sources::ReplaySpec& spec) {
        auto records = read_transcript_file(spec.transcript_path);
        std::stable_sort(records.begin(), records.end(),
                         [](const ResponseRecord& a, const ResponseRecord& b) {
                             return std::make_tuple(a.call_index, a.batch_index.value_or(0),
                                                    a.position_in_batch.value_or(0)) <
                                    std::make_tuple(b.call_index, b.batch_index.value_or(0),
                                                    b.position_in_batch.value_or(0));
                         });
        for (const auto& r : records) {
            if (!spec.filter.prompt_id.empty() && r.prompt_id != spec.filter.prompt_id) {
                continue;
            }
            replies_.push_back(r.parsed.raw_text);
        }
    }

    Reply invoke(const std::string&, const std::string&, double, int, int) override {
        if (cursor_ >= replies_.size()) {
            throw std::runtime_error("replay transcript exhausted after " +
                                     std::to_string(cursor_) + " responses");
        }
        return Reply{replies_[cursor_++], 0.0};
    }

  private:
    std::vector<std::string> replies_;
    std::size_t cursor_ = 0;
};

class ExternalRandomSource final : public DecisionSource {
  public:
    explicit ExternalRandomSource(const sources::ExternalRandomSpec& spec)
        : sequence_(sources::import_external_random_file(spec.path)) {}

    Reply invoke(const std::string&, const std::string&, double, int,
                 int expected_samples) override {
        std::string text;
        for (int i = 0; i < expected_samples; ++i) {
            if (cursor_ >= sequence_.items.size()) {
                throw std::runtime_error("external random sequence exhausted after " +
                                         std::to_string(cursor_) + " decisions");
            }
            if (i > 0) text += ", ";
            text += to_string(sequence_.items[cursor_++]);
        }
        return Reply{std::move(text), 0.0};
    }

  private:
    BinarySequence sequence_;
    std::size_t cursor_ = 0;
};

PromptAnalysis analyze_prompt(const std::vector<ResponseRecord>& records,
                              const std::string& prompt_id, SamplingMode mode, double alpha,
                              int w_max, stats::RunMode run_mode) {
    PromptAnalysis analysis;
    analysis.prompt_id = prompt_id;
    const BinarySequence seq = sequence_from_records(records, {prompt_id, mode, std::nullopt});
    analysis.yes_count = static_cast<std::uint64_t>(
        std::count(seq.items.begin(), seq.items.end(), Decision::Yes));
    analysis.no_count = seq.items.size() - analysis.yes_count;
    analysis.invalid_count = seq.excluded_invalid_count;
    if (analysis.yes_count + analysis.no_count > 0) {
        analysis.uniformity = stats::chi_square_uniform(analysis.yes_count, analysis.no_count, alpha);
    }
    if (seq.size() >= 2) {
        analysis.markov = stats::markov_independence_test(seq, alpha);
        analysis.recency = stats::recency_analysis(seq, w_max, run_mode);
    }
    return analysis;
}

}  // namespace

std::vector<PromptSpec> default_prompts() {
    return {{"Q1", "yes or no"}, {"Q2", "Answer randomly, yes or no"}};
}

void ExperimentConfig::validate() const {
    if (experiment_id.empty()) {
        throw std::invalid_argument("experiment_id must not be empty");
    }
    if (prompts.empty()) {
        throw std::invalid_argument("at least one prompt is required");
    }
    std::set<std::string> ids;
    for (const auto& p : prompts) {
        if (p.prompt_id.empty()) {
            throw std::invalid_argument("prompt_id must not be empty");
        }
        if (!ids.insert(p.prompt_id).second) {
            throw std::invalid_argument("duplicate prompt_id '" + p.prompt_id + "'");
        }
    }
    if (samples_per_prompt < 1) {
        throw std::invalid_argument("samples_per_prompt must be positive");
    }
    if (batch_size < 1 || batches < 1) {
        throw std::invalid_argument("batch_size and batches must be positive");
    }
    if (inter_call_delay_ms < 0) {
        throw std::invalid_argument("inter_call_delay_ms must be non-negative");
    }
    if (!(temperature >= 0.0 && temperature <= 2.0)) {
        throw std::invalid_argument("temperature " + format_temperature(temperature) +
                                    " outside [0, 2]");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("alpha must be within (0, 1)");
    }
    if (recency_w_max < 1) {
        throw std::invalid_argument("recency_w_max must be at least 1");
    }
    if (one_shot_max_tokens < 1 || few_shot_max_tokens < 1) {
        throw std::invalid_argument("max token budgets must be positive");
    }
}

std::string ExperimentConfig::model_label() const {
    if (const auto* endpoint = std::get_if<llm::EndpointConfig>(&source)) {
        return endpoint->model_id;
    }
    const auto& spec = std::get<sources::SourceSpec>(source);
    struct Visitor {
        std::string operator()(const sources::LiveSpec& live) const {
            return live.endpoint.model_id;
        }
        std::string operator()(const sources::BoltzmannSpec&) const {
            return "synthetic-boltzmann";
        }
        std::string operator()(const sources::MarkovChainSpec&) const {
            return "synthetic-markov";
        }
        std::string operator()(const sources::ReplaySpec&) const { return "replay"; }
        std::string operator()(const sources::ExternalRandomSpec&) const {
            return "external-random";
        }
    };
    return std::visit(Visitor{}, spec.variant);
}

namespace {

llm::EndpointConfig endpoint_from_json(const json& j) {
    llm::EndpointConfig endpoint;
    endpoint.base_url = j.at("base_url").get<std::string>();
    endpoint.model_id = j.at("model_id").get<std::string>();
    if (j.contains("api_key_env_var")) {
        endpoint.api_key_env_var = j.at("api_key_env_var").get<std::string>();
    }
    if (j.contains("timeout_ms")) endpoint.timeout_ms = j.at("timeout_ms").get<int>();
    if (j.contains("max_retries")) endpoint.max_retries = j.at("max_retries").get<int>();
    if (j.contains("retry_backoff_base_ms")) {
        endpoint.retry_backoff_base_ms = j.at("retry_backoff_base_ms").get<int>();
    }
    if (j.contains("system_message") && !j.at("system_message").is_null()) {
        endpoint.system_message = j.at("system_message").get<std::string>();
    }
    endpoint.validate();
    return endpoint;
}

sources::SourceSpec source_spec_from_json(const json& j) {
    sources::SourceSpec spec;
    const std::string type = j.at("type").get<std::string>();
    if (type == "live") {
        spec.variant = sources::LiveSpec{endpoint_from_json(j)};
    } else if (type == "boltzmann") {
        sources::BoltzmannSpec b;
        if (j.contains("logits")) b.logits = j.at("logits").get<std::vector<double>>();
        if (j.contains("temperature")) b.temperature = j.at("temperature").get<double>();
        spec.variant = std::move(b);
    } else if (type == "markov") {
        sources::MarkovChainSpec m;
        if (j.contains("p_initial_yes")) m.p_initial_yes = j.at("p_initial_yes").get<double>();
        if (j.contains("p_yes_given_yes")) {
            m.p_yes_given_yes = j.at("p_yes_given_yes").get<double>();
        }
        if (j.contains("p_yes_given_no")) m.p_yes_given_no = j.at("p_yes_given_no").get<double>();
        spec.variant = m;
    } else if (type == "replay") {
        sources::ReplaySpec r;
        r.transcript_path = j.at("transcript_path").get<std::string>();
        if (j.contains("prompt_id")) r.filter.prompt_id = j.at("prompt_id").get<std::string>();
        if (j.contains("mode")) {
            r.filter.mode = sampling_mode_from_string(j.at("mode").get<std::string>());
        }
        spec.variant = std::move(r);
    } else if (type == "external-random") {
        spec.variant = sources::ExternalRandomSpec{j.at("path").get<std::string>()};
    } else {
        throw std::invalid_argument("unknown source type '" + type + "'");
    }
    if (j.contains("seed") && !j.at("seed").is_null()) {
        spec.seed = j.at("seed").get<std::uint64_t>();
    }
    return spec;
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("invalid config JSON: ") + e.what());
    }
    ExperimentConfig config;
    if (j.contains("experiment_id")) {
        config.experiment_id = j.at("experiment_id").get<std::string>();
    }
    if (j.contains("source")) {
        const auto& src = j.at("source");
        const std::string type = src.value("type", "");
        if (type == "live") {
            // Plain endpoint config; keep the variant shallow.
            config.source = endpoint_from_json(src);
        } else {
            config.source = source_spec_from_json(src);
        }
    }
    if (j.contains("prompts")) {
        config.prompts.clear();
        for (const auto& p : j.at("prompts")) {
            config.prompts.push_back(PromptSpec{p.at("prompt_id").get<std::string>(),
                                                p.at("prompt_text").get<std::string>()});
        }
    }
    if (j.contains("mode")) {
        config.mode = sampling_mode_from_string(j.at("mode").get<std::string>());
    }
    if (j.contains("samples_per_prompt")) {
        config.samples_per_prompt = j.at("samples_per_prompt").get<int>();
    }
    if (j.contains("batch_size")) config.batch_size = j.at("batch_size").get<int>();
    if (j.contains("batches")) config.batches = j.at("batches").get<int>();
    if (j.contains("inter_call_delay_ms")) {
        config.inter_call_delay_ms = j.at("inter_call_delay_ms").get<int>();
    }
    if (j.contains("temperature")) config.temperature = j.at("temperature").get<double>();
    if (j.contains("alpha")) config.alpha = j.at("alpha").get<double>();
    if (j.contains("recency_w_max")) config.recency_w_max = j.at("recency_w_max").get<int>();
    if (j.contains("run_mode")) {
        const std::string mode = j.at("run_mode").get<std::string>();
        if (mode == "at-least") {
            config.run_mode = stats::RunMode::AtLeast;
        } else if (mode == "exact") {
            config.run_mode = stats::RunMode::Exact;
        } else {
            throw std::invalid_argument("run_mode must be 'at-least' or 'exact'");
        }
    }
    if (j.contains("seed") && !j.at("seed").is_null()) {
        config.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("few_shot_template")) {
        config.few_shot_template = j.at("few_shot_template").get<std::string>();
    }
    if (j.contains("one_shot_max_tokens")) {
        config.one_shot_max_tokens = j.at("one_shot_max_tokens").get<int>();
    }
    if (j.contains("few_shot_max_tokens")) {
        config.few_shot_max_tokens = j.at("few_shot_max_tokens").get<int>();
    }
    config.validate();
    return config;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open config file '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return config_from_json_text(buffer.str());
}

std::unique_ptr<DecisionSource> make_source(const ExperimentConfig& config) {
    if (const auto* endpoint = std::get_if<llm::EndpointConfig>(&config.source)) {
        return std::make_unique<LiveSource>(*endpoint);
    }
    const auto& spec = std::get<sources::SourceSpec>(config.source);
    const std::uint64_t seed = resolve_seed(spec.seed, config.seed);
    struct Visitor {
        std::uint64_t seed;
        std::unique_ptr<DecisionSource> operator()(const sources::LiveSpec& live) const {
            return std::make_unique<LiveSource>(live.endpoint);
        }
        std::unique_ptr<DecisionSource> operator()(const sources::BoltzmannSpec& b) const {
            return std::make_unique<BoltzmannSource>(b, seed);
        }
        std::unique_ptr<DecisionSource> operator()(const sources::MarkovChainSpec& m) const {
            return std::make_unique<MarkovSource>(m, seed);
        }
        std::unique_ptr<DecisionSource> operator()(const sources::ReplaySpec& r) const {
            return std::make_unique<ReplaySource>(r);
        }
        std::unique_ptr<DecisionSource> operator()(const sources::ExternalRandomSpec& e) const {
            return std::make_unique<ExternalRandomSource>(e);
        }
    };
    return std::visit(Visitor{seed}, spec.variant);
}

std::optional<std::uint64_t> effective_seed(const ExperimentConfig& config) {
    const auto* spec = std::get_if<sources::SourceSpec>(&config.source);
    if (spec == nullptr) {
        return std::nullopt;
    }
    const bool seeded_kind = std::holds_alternative<sources::BoltzmannSpec>(spec->variant) ||
                             std::holds_alternative<sources::MarkovChainSpec>(spec->variant);
    if (!seeded_kind) {
        return std::nullopt;
    }
    return spec->seed ? spec->seed : config.seed;
}

namespace {

struct Collection {
    std::vector<ResponseRecord> records;
};

Collection collect_one_shot(const ExperimentConfig& config, TranscriptWriter& writer) {
    auto source = make_source(config);
    const std::string model = config.model_label();
    const std::optional<std::uint64_t> seed = effective_seed(config);
    Collection collection;
    const std::size_t total_calls =
        config.prompts.size() * static_cast<std::size_t>(config.samples_per_prompt);
    for (std::size_t call_index = 0; call_index < total_calls; ++call_index) {
        if (call_index > 0 && config.inter_call_delay_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(config.inter_call_delay_ms));
        }
        const PromptSpec& prompt = config.prompts[call_index % config.prompts.size()];
        DecisionSource::Reply reply;
        try {
            reply = source->invoke(prompt.prompt_id, prompt.prompt_text, config.temperature,
                                   config.one_shot_max_tokens, 1);
        } catch (...) {
            writer.flush();  // keep what was collected before the failure
            throw;
        }
        ResponseRecord record;
        record.experiment_id = config.experiment_id;
        record.model_id = model;
        record.prompt_id = prompt.prompt_id;
        record.prompt_text = prompt.prompt_text;
        record.mode = SamplingMode::OneShot;
        record.call_index = call_index;
        record.temperature = config.temperature;
        record.parsed = sources::parse_decision(reply.raw_text);
        record.timestamp = now_utc_millis();
        record.latency_ms = reply.latency_ms;
        record.seed = seed;
        writer.write(record);
        collection.records.push_back(std::move(record));
    }
    writer.flush();
    return collection;
}

Collection collect_few_shot(const ExperimentConfig& config, TranscriptWriter& writer) {
    auto source = make_source(config);
    const std::string model = config.model_label();
    const std::optional<std::uint64_t> seed = effective_seed(config);
    Collection collection;
    std::uint64_t call_index = 0;
    for (const PromptSpec& prompt : config.prompts) {
        for (int batch = 0; batch < config.batches; ++batch) {
            if (call_index > 0 && config.inter_call_delay_ms > 0) {
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(config.inter_call_delay_ms));
            }
            std::string full_prompt = replace_all(config.few_shot_template, "{batch_size}",
                                                  std::to_string(config.batch_size));
            full_prompt = replace_all(full_prompt, "{prompt_text}", prompt.prompt_text);
            DecisionSource::Reply reply;
            try {
                reply = source->invoke(prompt.prompt_id, full_prompt, config.temperature,
                                       config.few_shot_max_tokens, config.batch_size);
            } catch (...) {
                writer.flush();
                throw;
            }
            const std::vector<ParsedResponse> tokens = sources::parse_few_shot(reply.raw_text);
            const TimestampMs stamp = now_utc_millis();
            for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
                ResponseRecord record;
                record.experiment_id = config.experiment_id;
                record.model_id = model;
                record.prompt_id = prompt.prompt_id;
                record.prompt_text = full_prompt;
                record.mode = SamplingMode::FewShot;
                record.call_index = call_index;
                record.batch_index = static_cast<std::uint64_t>(batch);
                record.position_in_batch = pos;
                record.temperature = config.temperature;
                record.parsed = tokens[pos];
                record.timestamp = stamp;
                record.latency_ms = reply.latency_ms;
                record.seed = seed;
                writer.write(record);
                collection.records.push_back(std::move(record));
            }
            ++call_index;
        }
    }
    writer.flush();
    return collection;
}

}  // namespace

ExperimentResult run_one_shot(const ExperimentConfig& config,
                              const std::filesystem::path& transcript_path) {
    config.validate();
    if (config.mode != SamplingMode::OneShot) {
        throw std::invalid_argument("run_one_shot requires a one-shot config");
    }
    std::ofstream out(transcript_path);
    if (!out) {
        throw TranscriptError(0, "cannot open '" + transcript_path.string() + "' for writing");
    }
    TranscriptWriter writer(out);
    const Collection collection = collect_one_shot(config, writer);
    ExperimentResult result = analyze_records(collection.records, config.alpha,
                                              config.recency_w_max, config.run_mode);
    result.transcript_path = transcript_path.string();
    return result;
}

ExperimentResult run_few_shot(const ExperimentConfig& config,
                              const std::filesystem::path& transcript_path) {
    config.validate();
    if (config.mode != SamplingMode::FewShot) {
        throw std::invalid_argument("run_few_shot requires a few-shot config");
    }
    std::ofstream out(transcript_path);
    if (!out) {
        throw TranscriptError(0, "cannot open '" + transcript_path.string() + "' for writing");
    }
    TranscriptWriter writer(out);
    const Collection collection = collect_few_shot(config, writer);
    ExperimentResult result =
        analyze_records(collection.records, config.alpha, config.recency_w_max, config.run_mode,
                        static_cast<std::uint64_t>(config.batch_size));
    result.transcript_path = transcript_path.string();
    return result;
}

ExperimentResult analyze_records(const std::vector<ResponseRecord>& records, double alpha,
                                 int recency_w_max, stats::RunMode run_mode,
                                 std::optional<std::uint64_t> expected_batch_size) {
    if (records.empty()) {
        throw std::invalid_argument("empty transcript");
    }
    const SamplingMode mode = records.front().mode;
    for (const auto& r : records) {
        if (r.mode != mode) {
            throw std::invalid_argument("transcript mixes one-shot and few-shot records");
        }
    }
    ExperimentResult result;
    result.experiment_id = records.front().experiment_id;
    result.model_id = records.front().model_id;
    result.mode = mode;
    result.temperature = records.front().temperature;
    result.alpha = alpha;

    std::vector<std::string> prompt_order;
    for (const auto& r : records) {
        if (std::find(prompt_order.begin(), prompt_order.end(), r.prompt_id) ==
            prompt_order.end()) {
            prompt_order.push_back(r.prompt_id);
        }
    }
    for (const auto& prompt_id : prompt_order) {
        result.per_prompt.push_back(
            analyze_prompt(records, prompt_id, mode, alpha, recency_w_max, run_mode));
    }

    if (mode == SamplingMode::FewShot) {
        for (const auto& prompt_id : prompt_order) {
            std::set<std::uint64_t> batch_indices;
            std::map<std::uint64_t, std::uint64_t> batch_call;
            for (const auto& r : records) {
                if (r.prompt_id == prompt_id && r.batch_index) {
                    batch_indices.insert(*r.batch_index);
                    batch_call[*r.batch_index] = r.call_index;
                }
            }
            for (const std::uint64_t batch_index : batch_indices) {
                Batch batch;
                batch.batch_index = batch_index;
                batch.sequence =
                    sequence_from_records(records, {prompt_id, mode, batch_index});
                batch.source_call_id = "call-" + std::to_string(batch_call[batch_index]);

                BatchAnalysis analysis;
                analysis.prompt_id = prompt_id;
                analysis.batch_index = batch_index;
                analysis.source_call_id = batch.source_call_id;
                analysis.yes_count = static_cast<std::uint64_t>(std::count(
                    batch.sequence.items.begin(), batch.sequence.items.end(), Decision::Yes));
                analysis.no_count = batch.sequence.items.size() - analysis.yes_count;
                analysis.invalid_count = batch.sequence.excluded_invalid_count;
                analysis.parsed_count =
                    batch.sequence.items.size() + batch.sequence.excluded_invalid_count;
                analysis.expected_count = expected_batch_size;
                analysis.length_mismatch =
                    expected_batch_size && analysis.parsed_count != *expected_batch_size;
                if (analysis.yes_count + analysis.no_count > 0) {
                    analysis.uniformity =
                        stats::chi_square_uniform(analysis.yes_count, analysis.no_count, alpha);
                }
                if (batch.sequence.size() >= 2) {
                    analysis.markov = stats::markov_independence_test(batch.sequence, alpha);
                }
                result.per_batch.push_back(std::move(analysis));
            }
        }
    }
    return result;
}

InterBatchSummary inter_batch_summary(const ExperimentResult& result) {
    if (result.mode != SamplingMode::FewShot || result.per_batch.empty()) {
        throw std::invalid_argument("inter-batch requires few-shot");
    }
    InterBatchSummary summary;
    double yes_percent_sum = 0.0;
    std::uint64_t yes_percent_batches = 0;
    double chi_sum = 0.0;
    std::uint64_t chi_batches = 0;
    for (const auto& batch : result.per_batch) {
        const std::uint64_t valid = batch.yes_count + batch.no_count;
        if (valid > 0) {
            yes_percent_sum +=
                100.0 * static_cast<double>(batch.yes_count) / static_cast<double>(valid);
            ++yes_percent_batches;
        }
        if (batch.uniformity) {
            chi_sum += batch.uniformity->statistic;
            summary.max_chi_square = std::max(summary.max_chi_square,
                                              batch.uniformity->statistic);
            ++chi_batches;
            summary.batches_rejecting_hp1 += batch.uniformity->reject_null ? 1 : 0;
        }
        if (batch.markov) {
            // Degenerate tables count as rejecting: a zero marginal is
            // near-perfect dependence, not evidence of independence.
            const bool rejects = batch.markov->degenerate ||
                                 (batch.markov->chi_square &&
                                  batch.markov->chi_square->reject_null);
            summary.batches_rejecting_hp2 += rejects ? 1 : 0;
        }
    }
    if (yes_percent_batches > 0) {
        summary.mean_yes_percent = yes_percent_sum / static_cast<double>(yes_percent_batches);
    }
    if (chi_batches > 0) {
        summary.mean_chi_square = chi_sum / static_cast<double>(chi_batches);
    }
    return summary;
}

SweepResult run_temperature_sweep(const ExperimentConfig& config,
                                  const std::vector<double>& temperatures,
                                  const std::filesystem::path& transcript_dir) {
    config.validate();
    if (temperatures.empty()) {
        throw std::invalid_argument("temperature list must not be empty");
    }
    for (double t : temperatures) {
        if (!(t >= 0.0 && t <= 2.0)) {
            throw std::invalid_argument("temperature " + format_temperature(t) +
                                        " outside [0, 2]; sweep aborted before any call");
        }
    }
    std::filesystem::create_directories(transcript_dir);
    // Seed offsets key on the temperature's rank among the requested
    // settings, so results per temperature do not depend on visit order.
    std::vector<double> sorted = temperatures;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    SweepResult sweep;
    for (std::size_t index = 0; index < temperatures.size(); ++index) {
        ExperimentConfig sub = config;
        sub.mode = SamplingMode::OneShot;
        sub.temperature = temperatures[index];
        sub.experiment_id =
            config.experiment_id + "-T" + format_temperature(temperatures[index]);
        const auto rank = static_cast<std::uint64_t>(
            std::lower_bound(sorted.begin(), sorted.end(), temperatures[index]) -
            sorted.begin());
        if (config.seed) {
            sub.seed = *config.seed + rank;
        }
        if (auto* spec = std::get_if<sources::SourceSpec>(&sub.source); spec && spec->seed) {
            spec->seed = *spec->seed + rank;
        }
        const std::filesystem::path transcript =
            transcript_dir / (sub.experiment_id + ".jsonl");
        SweepEntry entry;
        entry.temperature = temperatures[index];
        entry.result = run_one_shot(sub, transcript);
        sweep.entries.push_back(std::move(entry));
    }
    return sweep;
}

std::string sweep_plot_data(const SweepResult& sweep, const std::string& prompt_id) {
    std::ostringstream out;
    out << "temperature\tp_yes\n";
    for (const auto& entry : sweep.entries) {
        for (const auto& prompt : entry.result.per_prompt) {
            if (prompt.prompt_id != prompt_id) {
                continue;
            }
            out << format_temperature(entry.temperature) << '\t';
            const std::uint64_t valid = prompt.yes_count + prompt.no_count;
            if (valid > 0) {
                out << format_rate(static_cast<double>(prompt.yes_count) /
                                   static_cast<double>(valid));
            } else {
                out << "na";
            }
            out << '\n';
        }
    }
    return out.str();
}

RecencyComparison compare_recency(const BinarySequence& seq_a, const BinarySequence& seq_b,
                                  int w_max, double alpha, stats::RunMode mode) {
    if (seq_a.size() < 2 || seq_b.size() < 2) {
        throw std::invalid_argument("sequence too short");
    }
    if (w_max < 1) {
        throw std::invalid_argument("w_max must be at least 1");
    }
    RecencyComparison comparison;
    comparison.alpha = alpha;
    comparison.analysis_a = stats::recency_analysis(seq_a, w_max, mode);
    comparison.analysis_b = stats::recency_analysis(seq_b, w_max, mode);
    for (int w = 1; w <= w_max; ++w) {
        WindowComparison window;
        window.w = w;
        const std::vector<double> sample_a = stats::switch_indicator_sample(seq_a, w, mode);
        const std::vector<double> sample_b = stats::switch_indicator_sample(seq_b, w, mode);
        window.qualifying_a = sample_a.size();
        window.qualifying_b = sample_b.size();
        if (sample_a.size() < 2 || sample_b.size() < 2) {
            window.testable = false;
            window.note = "fewer than two qualifying positions in " +
                          std::string(sample_a.size() < 2 ? "sequence a" : "sequence b");
        } else {
            window.testable = true;
            window.t_test = stats::two_sample_t_test(sample_a, sample_b, alpha);
        }
        comparison.per_window.push_back(std::move(window));
    }
    return comparison;
}

}  // namespace binaudit::experiment
