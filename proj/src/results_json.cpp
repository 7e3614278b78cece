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

#include "binaudit/results_json.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

namespace binaudit::experiment {

namespace {

using nlohmann::json;

json chi_to_json(const stats::ChiSquareResult& r) {
    return json{{"statistic", r.statistic},
                {"degrees_of_freedom", r.degrees_of_freedom},
                {"p_value", r.p_value},
                {"alpha", r.alpha},
                {"reject_null", r.reject_null}};
}

stats::ChiSquareResult chi_from_json(const json& j) {
    stats::ChiSquareResult r;
    r.statistic = j.at("statistic").get<double>();
    r.degrees_of_freedom = j.at("degrees_of_freedom").get<int>();
    r.p_value = j.at("p_value").get<double>();
    r.alpha = j.at("alpha").get<double>();
    r.reject_null = j.at("reject_null").get<bool>();
    return r;
}

json markov_to_json(const stats::MarkovTestResult& r) {
    json j{{"p_yes", r.p_yes},
           {"counts",
            {{"n_yy", r.counts.n_yy},
             {"n_yn", r.counts.n_yn},
             {"n_ny", r.counts.n_ny},
             {"n_nn", r.counts.n_nn}}},
           {"degenerate", r.degenerate}};
    j["p_yes_given_yes"] = r.p_yes_given_yes ? json(*r.p_yes_given_yes) : json(nullptr);
    j["chi_square"] = r.chi_square ? chi_to_json(*r.chi_square) : json(nullptr);
    j["degeneracy_reason"] = r.degeneracy_reason ? json(*r.degeneracy_reason) : json(nullptr);
    return j;
}

stats::MarkovTestResult markov_from_json(const json& j) {
    stats::MarkovTestResult r;
    r.p_yes = j.at("p_yes").get<double>();
    const auto& counts = j.at("counts");
    r.counts.n_yy = counts.at("n_yy").get<std::uint64_t>();
    r.counts.n_yn = counts.at("n_yn").get<std::uint64_t>();
    r.counts.n_ny = counts.at("n_ny").get<std::uint64_t>();
    r.counts.n_nn = counts.at("n_nn").get<std::uint64_t>();
    r.degenerate = j.at("degenerate").get<bool>();
    if (!j.at("p_yes_given_yes").is_null()) {
        r.p_yes_given_yes = j.at("p_yes_given_yes").get<double>();
    }
    if (!j.at("chi_square").is_null()) {
        r.chi_square = chi_from_json(j.at("chi_square"));
    }
    if (!j.at("degeneracy_reason").is_null()) {
        r.degeneracy_reason = j.at("degeneracy_reason").get<std::string>();
    }
    return r;
}

json recency_to_json(const stats::RecencyAnalysis& r) {
    json windows = json::object();
    for (const auto& [w, window] : r.per_window) {
        json entry{{"qualifying_positions", window.qualifying_positions}};
        entry["switch_rate"] = window.switch_rate ? json(*window.switch_rate) : json(nullptr);
        entry["recency_effect"] =
            window.recency_effect ? json(*window.recency_effect) : json(nullptr);
        windows[std::to_string(w)] = std::move(entry);
    }
    return json{{"baseline_rate", r.baseline_rate}, {"per_window", std::move(windows)}};
}

stats::RecencyAnalysis recency_from_json(const json& j) {
    stats::RecencyAnalysis r;
    r.baseline_rate = j.at("baseline_rate").get<double>();
    for (const auto& [key, entry] : j.at("per_window").items()) {
        stats::RecencyWindow window;
        window.qualifying_positions = entry.at("qualifying_positions").get<std::uint64_t>();
        if (!entry.at("switch_rate").is_null()) {
            window.switch_rate = entry.at("switch_rate").get<double>();
        }
        if (!entry.at("recency_effect").is_null()) {
            window.recency_effect = entry.at("recency_effect").get<double>();
        }
        r.per_window.emplace(std::stoi(key), window);
    }
    return r;
}

// Infinite t statistics (zero-variance degenerate comparisons) are encoded
// as strings, since JSON numbers cannot carry them.
json t_statistic_to_json(double t) {
    if (std::isinf(t)) {
        return json(t > 0 ? "inf" : "-inf");
    }
    return json(t);
}

double t_statistic_from_json(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw std::invalid_argument("unrecognized t statistic '" + s + "'");
    }
    return j.get<double>();
}

json t_test_to_json(const stats::TTestResult& r) {
    json j{{"t_statistic", t_statistic_to_json(r.t_statistic)},
           {"degrees_of_freedom", r.degrees_of_freedom},
           {"p_value", r.p_value},
           {"mean_a", r.mean_a},
           {"mean_b", r.mean_b},
           {"alpha", r.alpha},
           {"reject_null", r.reject_null}};
    j["note"] = r.note ? json(*r.note) : json(nullptr);
    return j;
}

stats::TTestResult t_test_from_json(const json& j) {
    stats::TTestResult r;
    r.t_statistic = t_statistic_from_json(j.at("t_statistic"));
    r.degrees_of_freedom = j.at("degrees_of_freedom").get<double>();
    r.p_value = j.at("p_value").get<double>();
    r.mean_a = j.at("mean_a").get<double>();
    r.mean_b = j.at("mean_b").get<double>();
    r.alpha = j.at("alpha").get<double>();
    r.reject_null = j.at("reject_null").get<bool>();
    if (!j.at("note").is_null()) {
        r.note = j.at("note").get<std::string>();
    }
    return r;
}

json prompt_to_json(const PromptAnalysis& p) {
    json j{{"prompt_id", p.prompt_id},
           {"yes_count", p.yes_count},
           {"no_count", p.no_count},
           {"invalid_count", p.invalid_count}};
    j["uniformity"] = p.uniformity ? chi_to_json(*p.uniformity) : json(nullptr);
    j["markov"] = p.markov ? markov_to_json(*p.markov) : json(nullptr);
    j["recency"] = p.recency ? recency_to_json(*p.recency) : json(nullptr);
    return j;
}

PromptAnalysis prompt_from_json(const json& j) {
    PromptAnalysis p;
    p.prompt_id = j.at("prompt_id").get<std::string>();
    p.yes_count = j.at("yes_count").get<std::uint64_t>();
    p.no_count = j.at("no_count").get<std::uint64_t>();
    p.invalid_count = j.at("invalid_count").get<std::uint64_t>();
    if (!j.at("uniformity").is_null()) p.uniformity = chi_from_json(j.at("uniformity"));
    if (!j.at("markov").is_null()) p.markov = markov_from_json(j.at("markov"));
    if (!j.at("recency").is_null()) p.recency = recency_from_json(j.at("recency"));
    return p;
}

json batch_to_json(const BatchAnalysis& b) {
    json j{{"prompt_id", b.prompt_id},
           {"batch_index", b.batch_index},
           {"source_call_id", b.source_call_id},
           {"yes_count", b.yes_count},
           {"no_count", b.no_count},
           {"invalid_count", b.invalid_count},
           {"parsed_count", b.parsed_count},
           {"length_mismatch", b.length_mismatch}};
    j["expected_count"] = b.expected_count ? json(*b.expected_count) : json(nullptr);
    j["uniformity"] = b.uniformity ? chi_to_json(*b.uniformity) : json(nullptr);
    j["markov"] = b.markov ? markov_to_json(*b.markov) : json(nullptr);
    return j;
}

BatchAnalysis batch_from_json(const json& j) {
    BatchAnalysis b;
    b.prompt_id = j.at("prompt_id").get<std::string>();
    b.batch_index = j.at("batch_index").get<std::uint64_t>();
    b.source_call_id = j.at("source_call_id").get<std::string>();
    b.yes_count = j.at("yes_count").get<std::uint64_t>();
    b.no_count = j.at("no_count").get<std::uint64_t>();
    b.invalid_count = j.at("invalid_count").get<std::uint64_t>();
    b.parsed_count = j.at("parsed_count").get<std::uint64_t>();
    b.length_mismatch = j.at("length_mismatch").get<bool>();
    if (!j.at("expected_count").is_null()) {
        b.expected_count = j.at("expected_count").get<std::uint64_t>();
    }
    if (!j.at("uniformity").is_null()) b.uniformity = chi_from_json(j.at("uniformity"));
    if (!j.at("markov").is_null()) b.markov = markov_from_json(j.at("markov"));
    return b;
}

json experiment_to_json(const ExperimentResult& r) {
    json j{{"experiment_id", r.experiment_id},
           {"model_id", r.model_id},
           {"mode", std::string(to_string(r.mode))},
           {"temperature", r.temperature},
           {"alpha", r.alpha},
           {"transcript_path", r.transcript_path}};
    json prompts = json::array();
    for (const auto& p : r.per_prompt) prompts.push_back(prompt_to_json(p));
    j["per_prompt"] = std::move(prompts);
    json batches = json::array();
    for (const auto& b : r.per_batch) batches.push_back(batch_to_json(b));
    j["per_batch"] = std::move(batches);
    return j;
}

ExperimentResult experiment_from_json(const json& j) {
    ExperimentResult r;
    r.experiment_id = j.at("experiment_id").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    r.mode = sampling_mode_from_string(j.at("mode").get<std::string>());
    r.temperature = j.at("temperature").get<double>();
    r.alpha = j.at("alpha").get<double>();
    r.transcript_path = j.at("transcript_path").get<std::string>();
    for (const auto& p : j.at("per_prompt")) r.per_prompt.push_back(prompt_from_json(p));
    for (const auto& b : j.at("per_batch")) r.per_batch.push_back(batch_from_json(b));
    return r;
}

json comparison_to_json(const RecencyComparison& c) {
    json windows = json::array();
    for (const auto& w : c.per_window) {
        json entry{{"w", w.w},
                   {"testable", w.testable},
                   {"note", w.note},
                   {"qualifying_a", w.qualifying_a},
                   {"qualifying_b", w.qualifying_b}};
        entry["t_test"] = w.t_test ? t_test_to_json(*w.t_test) : json(nullptr);
        windows.push_back(std::move(entry));
    }
    return json{{"alpha", c.alpha},
                {"analysis_a", recency_to_json(c.analysis_a)},
                {"analysis_b", recency_to_json(c.analysis_b)},
                {"per_window", std::move(windows)}};
}

RecencyComparison comparison_from_json(const json& j) {
    RecencyComparison c;
    c.alpha = j.at("alpha").get<double>();
    c.analysis_a = recency_from_json(j.at("analysis_a"));
    c.analysis_b = recency_from_json(j.at("analysis_b"));
    for (const auto& entry : j.at("per_window")) {
        WindowComparison w;
        w.w = entry.at("w").get<int>();
        w.testable = entry.at("testable").get<bool>();
        w.note = entry.at("note").get<std::string>();
        w.qualifying_a = entry.at("qualifying_a").get<std::uint64_t>();
        w.qualifying_b = entry.at("qualifying_b").get<std::uint64_t>();
        if (!entry.at("t_test").is_null()) {
            w.t_test = t_test_from_json(entry.at("t_test"));
        }
        c.per_window.push_back(std::move(w));
    }
    return c;
}

json crawl_aggregate_to_json(const crawl::CrawlAggregate& a) {
    json j{{"pages", a.pages},
           {"total_yes", a.total_yes},
           {"total_no", a.total_no},
           {"neither_fraction", a.neither_fraction}};
    j["corpus_yes_fraction"] =
        a.corpus_yes_fraction ? json(*a.corpus_yes_fraction) : json(nullptr);
    j["mean_page_conditional"] =
        a.mean_page_conditional ? json(*a.mean_page_conditional) : json(nullptr);
    j["uniformity_test"] = a.uniformity_test ? chi_to_json(*a.uniformity_test) : json(nullptr);
    return j;
}

crawl::CrawlAggregate crawl_aggregate_from_json(const json& j) {
    crawl::CrawlAggregate a;
    a.pages = j.at("pages").get<std::uint64_t>();
    a.total_yes = j.at("total_yes").get<std::uint64_t>();
    a.total_no = j.at("total_no").get<std::uint64_t>();
    a.neither_fraction = j.at("neither_fraction").get<double>();
    if (!j.at("corpus_yes_fraction").is_null()) {
        a.corpus_yes_fraction = j.at("corpus_yes_fraction").get<double>();
    }
    if (!j.at("mean_page_conditional").is_null()) {
        a.mean_page_conditional = j.at("mean_page_conditional").get<double>();
    }
    if (!j.at("uniformity_test").is_null()) {
        a.uniformity_test = chi_from_json(j.at("uniformity_test"));
    }
    return a;
}

json page_to_json(const crawl::CrawlPageStats& p) {
    return json{{"record_id", p.record_id},
                {"yes_count", p.yes_count},
                {"no_count", p.no_count},
                {"truncated", p.truncated},
                {"chars_scanned", p.chars_scanned}};
}

crawl::CrawlPageStats page_from_json(const json& j) {
    crawl::CrawlPageStats p;
    p.record_id = j.at("record_id").get<std::string>();
    p.yes_count = j.at("yes_count").get<std::uint64_t>();
    p.no_count = j.at("no_count").get<std::uint64_t>();
    p.truncated = j.at("truncated").get<bool>();
    p.chars_scanned = j.at("chars_scanned").get<std::uint64_t>();
    return p;
}

}  // namespace

std::string results_document_to_json_text(const ResultsDocument& document) {
    json j{{"format", "binaudit-results"}, {"format_version", "1"}};
    json experiments = json::array();
    for (const auto& e : document.experiments) experiments.push_back(experiment_to_json(e));
    j["experiments"] = std::move(experiments);
    if (document.sweep) {
        json entries = json::array();
        for (const auto& entry : document.sweep->entries) {
            entries.push_back(json{{"temperature", entry.temperature},
                                   {"result", experiment_to_json(entry.result)}});
        }
        j["sweep"] = json{{"entries", std::move(entries)}};
    } else {
        j["sweep"] = nullptr;
    }
    j["comparison"] =
        document.comparison ? comparison_to_json(*document.comparison) : json(nullptr);
    j["crawl_aggregate"] = document.crawl_aggregate
                               ? crawl_aggregate_to_json(*document.crawl_aggregate)
                               : json(nullptr);
    json pages = json::array();
    for (const auto& p : document.crawl_pages) pages.push_back(page_to_json(p));
    j["crawl_pages"] = std::move(pages);
    return j.dump(2);
}

ResultsDocument results_document_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("invalid results JSON: ") + e.what());
    }
    if (j.value("format", "") != "binaudit-results") {
        throw std::invalid_argument("not a binaudit results document");
    }
    if (j.value("format_version", "") != "1") {
        throw std::invalid_argument("unknown results format_version");
    }
    ResultsDocument document;
    for (const auto& e : j.at("experiments")) {
        document.experiments.push_back(experiment_from_json(e));
    }
    if (j.contains("sweep") && !j.at("sweep").is_null()) {
        SweepResult sweep;
        for (const auto& entry : j.at("sweep").at("entries")) {
            SweepEntry sweep_entry;
            sweep_entry.temperature = entry.at("temperature").get<double>();
            sweep_entry.result = experiment_from_json(entry.at("result"));
            sweep.entries.push_back(std::move(sweep_entry));
        }
        document.sweep = std::move(sweep);
    }
    if (j.contains("comparison") && !j.at("comparison").is_null()) {
        document.comparison = comparison_from_json(j.at("comparison"));
    }
    if (j.contains("crawl_aggregate") && !j.at("crawl_aggregate").is_null()) {
        document.crawl_aggregate = crawl_aggregate_from_json(j.at("crawl_aggregate"));
    }
    if (j.contains("crawl_pages")) {
        for (const auto& p : j.at("crawl_pages")) {
            document.crawl_pages.push_back(page_from_json(p));
        }
    }
    return document;
}

std::string render_document(const ResultsDocument& document, ReportFormat format) {
    ReportInputs inputs;
    for (const auto& e : document.experiments) {
        inputs.experiments.push_back(&e);
    }
    if (document.sweep) inputs.sweep = &*document.sweep;
    if (document.comparison) inputs.comparison = &*document.comparison;
    if (document.crawl_aggregate) inputs.crawl_aggregate = &*document.crawl_aggregate;
    return render_report(inputs, format);
}

}  // namespace binaudit::experiment
