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

// Acceptance battery. Every criterion prints one [PASS]/[FAIL] line; the
// process exits with the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "binaudit/crawl.hpp"
#include "binaudit/experiment.hpp"
#include "binaudit/mock_endpoint.hpp"
#include "binaudit/sources.hpp"
#include "binaudit/stats.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace binaudit;
using namespace binaudit::testing;

namespace {

namespace fs = std::filesystem;

class Checker {
  public:
    void require(bool condition, const std::string& message) {
        if (!condition) {
            failures_.push_back(message);
        }
    }
    const std::vector<std::string>& failures() const { return failures_; }

  private:
    std::vector<std::string> failures_;
};

struct Criterion {
    int number;
    std::string name;
    std::function<void(Checker&)> body;
};

fs::path scratch(const std::string& name) {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "binaudit-acceptance";
        fs::create_directories(d);
        return d;
    }();
    return dir / name;
}

std::string format_seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2fs", s);
    return buf;
}

bool close(double value, double target, double tolerance) {
    return std::fabs(value - target) <= tolerance;
}

bool relative_close(double value, double target, double fraction) {
    return std::fabs(value - target) <= fraction * std::fabs(target);
}

double round2(double value) {
    return std::round(value * 100.0) / 100.0;
}

llm::EndpointConfig endpoint_for(const llm::MockEndpoint& mock) {
    llm::EndpointConfig endpoint;
    endpoint.base_url = mock.base_url();
    endpoint.model_id = "mock-model";
    endpoint.api_key_env_var = "BINAUDIT_ACCEPT_KEY";
    endpoint.max_retries = 0;
    endpoint.timeout_ms = 10000;
    return endpoint;
}

experiment::ExperimentConfig config_for(const llm::MockEndpoint& mock) {
    experiment::ExperimentConfig config;
    config.source = endpoint_for(mock);
    config.inter_call_delay_ms = 0;
    return config;
}

// ---------------------------------------------------------------------------

void criterion_1_table1_arithmetic(Checker& check) {
    const auto started = std::chrono::steady_clock::now();
    struct Row {
        std::uint64_t yes, no;
        double exact_statistic;  // what the arithmetic must produce
        double table_statistic;  // target display value, rounded
        double table_p;
    };
    const Row rows[] = {
        {32, 68, 12.96, 13.0, 3.18e-4}, {43, 57, 1.96, 2.0, 0.162},
        {99, 1, 96.04, 96.0, 1.13e-22}, {98, 2, 92.16, 92.2, 7.99e-22},
        {87, 0, 87.0, 87.0, 1.09e-20},
    };
    for (const auto& row : rows) {
        const auto result = stats::chi_square_uniform(row.yes, row.no, 0.05);
        std::ostringstream id;
        id << "(" << row.yes << "," << row.no << ")";
        check.require(close(result.statistic, row.exact_statistic, 1e-9),
                      id.str() + " statistic " + std::to_string(result.statistic) +
                          " != exact " + std::to_string(row.exact_statistic));
        check.require(close(result.statistic, row.table_statistic, 0.05),
                      id.str() + " statistic not within 0.05 of the target " +
                          std::to_string(row.table_statistic));
        check.require(relative_close(result.p_value, row.table_p, 0.05),
                      id.str() + " p-value " + std::to_string(result.p_value) +
                          " not within 5% of the target");
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    check.require(elapsed < 1.0, "arithmetic took " + format_seconds(elapsed));
}

void criterion_2_table3_arithmetic(Checker& check) {
    struct Row {
        std::uint64_t yes, no;
        double exact_statistic;  // correct Pearson arithmetic
        double table_statistic;  // target display value
        bool reject;
    };
    // Two target display values (2.97, 2.17) are rounded inconsistently
    // with the p-values they sit next to (2.916 -> p 0.088, 2.116 ->
    // p 0.146), so the display comparison happens at two-decimal
    // precision.
    const Row rows[] = {
        {527, 473, 2.916, 2.97, false}, {534, 466, 4.624, 4.62, true},
        {523, 477, 2.116, 2.17, false}, {530, 470, 3.600, 3.60, false},
        {498, 502, 0.016, 0.02, false},
    };
    for (const auto& row : rows) {
        const auto result = stats::chi_square_uniform(row.yes, row.no, 0.05);
        std::ostringstream id;
        id << "(" << row.yes << "," << row.no << ")";
        check.require(close(result.statistic, row.exact_statistic, 1e-9),
                      id.str() + " statistic != exact Pearson value");
        check.require(std::fabs(round2(result.statistic) - row.table_statistic) <= 0.05 + 1e-9,
                      id.str() + " statistic not within 0.05 of the target at display precision");
        check.require(result.reject_null == row.reject,
                      id.str() + " reject/not-reject mismatch at alpha 0.05");
    }
}

void criterion_3_critical_value(Checker& check) {
    const double p = stats::chi_square_p_value(3.841, 1);
    check.require(close(p, 0.05, 5e-4),
                  "p(3.841, df=1) = " + std::to_string(p) + " not within 5e-4 of 0.05");
}

void criterion_4_boltzmann(Checker& check) {
    const auto started = std::chrono::steady_clock::now();
    sources::BoltzmannSpec fair;
    fair.logits = {0.0, 0.0};
    fair.temperature = 1.0;
    sources::Xoshiro256ss rng(2024);
    const auto sample = sources::sample_boltzmann(fair, rng, 10000);
    const auto yes = static_cast<double>(
        std::count(sample.items.begin(), sample.items.end(), Decision::Yes));
    check.require(close(yes / 10000.0, 0.5, 0.015),
                  "fair sampler yes fraction " + std::to_string(yes / 10000.0) +
                      " outside 0.5 +/- 0.015");

    const auto probs = sources::boltzmann_probability(std::vector<double>{1.0, 0.0}, 1.0);
    check.require(close(probs[0], 0.7311, 1e-4), "P(Yes) for logits (1,0) at T=1 off");
    check.require(close(probs[1], 0.2689, 1e-4), "P(No) for logits (1,0) at T=1 off");

    // 20-point temperature grid: argmax fixed, P(Yes) strictly decreasing
    // and above 0.5 for logits (1, 0).
    double previous = 1.0;
    for (int k = 1; k <= 20; ++k) {
        const double t = 0.1 * static_cast<double>(k);
        const auto p = sources::boltzmann_probability(std::vector<double>{1.0, 0.0}, t);
        check.require(p[0] > p[1], "argmax moved at T=" + std::to_string(t));
        check.require(p[0] < previous && p[0] > 0.5,
                      "P(Yes) not strictly decreasing toward 0.5 at T=" + std::to_string(t));
        previous = p[0];
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    check.require(elapsed < 5.0, "sampler checks took " + format_seconds(elapsed));
}

void criterion_5_hp2_calibration_and_power(Checker& check) {
    const auto started = std::chrono::steady_clock::now();
    int false_rejections = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        const auto seq = fair_iid(1000, 120000 + i);
        const auto result = stats::markov_independence_test(seq, 0.05);
        false_rejections += !result.degenerate && result.chi_square->reject_null;
    }
    check.require(false_rejections >= 5 && false_rejections <= 15,
                  "fair-source HP2 rejections " + std::to_string(false_rejections) +
                      "/200 outside [5, 15] (5% +/- 2.5%)");

    sources::MarkovChainSpec sticky;
    sticky.p_yes_given_yes = 0.9;
    sticky.p_yes_given_no = 0.1;
    int detections = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        sources::Xoshiro256ss rng(130000 + i);
        const auto seq = sources::sample_markov_chain(sticky, rng, 1000);
        const auto result = stats::markov_independence_test(seq, 0.05);
        detections += !result.degenerate && result.chi_square->reject_null;
    }
    check.require(detections >= 198, "markov-source HP2 detections " +
                                         std::to_string(detections) + "/200 below 99%");
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    check.require(elapsed < 60.0, "calibration took " + format_seconds(elapsed));
}

void criterion_6_hp1_calibration(Checker& check) {
    int rejections = 0;
    for (std::uint64_t i = 0; i < 500; ++i) {
        const auto seq = fair_iid(1000, 140000 + i);
        const auto yes = static_cast<std::uint64_t>(
            std::count(seq.items.begin(), seq.items.end(), Decision::Yes));
        rejections += stats::chi_square_uniform(yes, seq.size() - yes, 0.05).reject_null;
    }
    check.require(rejections >= 13 && rejections <= 37,
                  "fair-source HP1 rejections " + std::to_string(rejections) +
                      "/500 outside [13, 37] (5% +/- 2.5%)");
}

void criterion_7_recency_machinery(Checker& check) {
    const auto fixture = seq_of("YYNYNNNYYYNYNYYNNYNYYYYNYNNYNNNYYNYNYYNNYYYNYNNYYN");
    check.require(fixture.size() == 50, "fixture length drifted");
    const auto analysis = stats::recency_analysis(fixture, 5);
    const auto oracle = oracle_recency(fixture, 5);
    check.require(analysis.baseline_rate == oracle.baseline_rate,
                  "baseline differs from the brute-force oracle");
    for (const auto& [w, window] : analysis.per_window) {
        const auto& expected = oracle.per_window.at(w);
        check.require(window.qualifying_positions == expected.qualifying_positions,
                      "qualifying positions differ at w=" + std::to_string(w));
        check.require(window.switch_rate == expected.switch_rate,
                      "switch rate differs at w=" + std::to_string(w));
        check.require(window.recency_effect == expected.recency_effect,
                      "recency effect differs at w=" + std::to_string(w));
    }

    int all_small = 0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const auto seq = fair_iid(10000, 150000 + i);
        bool small = true;
        for (int w = 1; w <= 3; ++w) {
            const auto effect = stats::recency_effect(seq, w);
            small = small && effect && std::fabs(*effect) < 0.05;
        }
        all_small += small;
    }
    check.require(all_small >= 95, "only " + std::to_string(all_small) +
                                       "/100 seeds kept |effect| < 0.05 for w <= 3");
}

void criterion_8_hp3(Checker& check) {
    const auto self = fair_iid(1000, 161001);
    const auto self_comparison = experiment::compare_recency(self, self, 5, 0.05);
    int testable = 0;
    for (const auto& window : self_comparison.per_window) {
        if (!window.testable) continue;
        ++testable;
        check.require(window.t_test->t_statistic == 0.0 && window.t_test->p_value == 1.0,
                      "self-comparison not (t=0, p=1) at w=" + std::to_string(window.w));
    }
    check.require(testable >= 4, "too few testable windows in self-comparison");

    const auto fair = fair_iid(1000, 162002);
    const auto versus = experiment::compare_recency(alternating(1000), fair, 1, 0.05);
    check.require(versus.per_window[0].testable && versus.per_window[0].t_test->reject_null,
                  "alternating vs fair did not reject at w=1");

    std::map<int, int> rejections;
    std::map<int, int> tested;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const auto a = fair_iid(1000, 170000 + 2 * i);
        const auto b = fair_iid(1000, 170000 + 2 * i + 1);
        const auto comparison = experiment::compare_recency(a, b, 5, 0.05);
        for (const auto& window : comparison.per_window) {
            if (!window.testable) continue;
            tested[window.w] += 1;
            rejections[window.w] += window.t_test->reject_null;
        }
    }
    for (const auto& [w, count] : tested) {
        check.require(rejections[w] * 10 <= count,
                      "fair-vs-fair rejections at w=" + std::to_string(w) + " exceed 10% (" +
                          std::to_string(rejections[w]) + "/" + std::to_string(count) + ")");
    }
}

void criterion_9_degenerate_end_to_end(Checker& check) {
    setenv("BINAUDIT_ACCEPT_KEY", "acceptance", 1);
    std::vector<llm::ScriptedResponse> script;
    for (int call = 0; call < 200; ++call) {
        if (call % 2 == 0) {
            const int q1_index = call / 2;
            script.push_back({200, q1_index < 87 ? "yes" : "I must decline to answer", 0});
        } else {
            script.push_back({200, call % 4 == 1 ? "yes" : "no", 0});
        }
    }
    llm::MockEndpoint mock(script);
    auto config = config_for(mock);
    config.experiment_id = "degenerate";
    const auto result = experiment::run_one_shot(config, scratch("degenerate.jsonl"));

    const auto& q1 = result.per_prompt.front();
    check.require(q1.prompt_id == "Q1", "first prompt is not Q1");
    check.require(q1.yes_count == 87 && q1.no_count == 0 && q1.invalid_count == 13,
                  "Q1 counts are not 87 yes / 0 no / 13 invalid");
    check.require(q1.uniformity && close(q1.uniformity->statistic, 87.0, 1e-9),
                  "Q1 HP1 statistic is not 87.0");
    check.require(q1.markov && q1.markov->degenerate, "Q1 HP2 not flagged degenerate");
    check.require(q1.markov && q1.markov->counts.n_yy == 86, "Q1 n_yy is not 86");
    check.require(q1.markov && q1.markov->p_yes_given_yes &&
                      *q1.markov->p_yes_given_yes == 1.0,
                  "Q1 P(Y|Y) is not 1.0");

    // The saved transcript reproduces the same battery.
    const auto records = read_transcript_file(scratch("degenerate.jsonl"));
    const auto reanalyzed = experiment::analyze_records(records, 0.05, 5,
                                                        stats::RunMode::AtLeast);
    check.require(reanalyzed.per_prompt.front().markov->degenerate,
                  "transcript re-analysis lost the degeneracy flag");
}

void criterion_10_parsers(Checker& check) {
    struct OneShotCase {
        const char* raw;
        char expected;  // 'Y', 'N', 'I'
    };
    const OneShotCase one_shot[] = {
        {"yes", 'Y'}, {"Yes", 'Y'}, {"YES", 'Y'}, {"yes.", 'Y'}, {"Yes!", 'Y'},
        {" yes\n", 'Y'}, {"\"Yes\"", 'Y'}, {"**yes**", 'Y'}, {"no", 'N'}, {"No", 'N'},
        {"NO", 'N'}, {"no.", 'N'}, {"No,", 'N'}, {"\tno\r\n", 'N'}, {"(no)", 'N'},
        {"nO", 'N'}, {"maybe", 'I'}, {"yes and no", 'I'},
        {"As an AI, I would say yes.", 'I'}, {"I cannot answer", 'I'}, {"", 'I'},
        {"y", 'I'}, {"noo", 'I'}, {"yes\nno", 'I'},
    };
    std::size_t index = 0;
    for (const auto& entry : one_shot) {
        const auto parsed = sources::parse_decision(entry.raw);
        const char got = !parsed.valid() ? 'I'
                         : *parsed.outcome == Decision::Yes ? 'Y'
                                                            : 'N';
        check.require(got == entry.expected,
                      "one-shot case " + std::to_string(index) + " ('" + entry.raw +
                          "') parsed as " + got);
        check.require(parsed.raw_text == entry.raw,
                      "one-shot case " + std::to_string(index) + " lost raw text");
        ++index;
    }

    struct FewShotCase {
        const char* raw;
        const char* expected;  // one letter per token
    };
    const FewShotCase few_shot[] = {
        {"yes, no, yes", "YNY"},
        {"Yes,no,  YES\n", "YNY"},
        {"yes\nno\nyes", "YNY"},
        {"yes, maybe, no", "YIN"},
        {"yes; maybe, no", "IN"},
        {"1. yes, 2. no", "II"},
        {"", ""},
        {",,,", ""},
        {"no,no,no,no", "NNNN"},
        {"Yes, No, Yes, No, Yes", "YNYNY"},
        {"yes,\nno,\nyes", "YNY"},
        {"sure, no problem, yes", "IIY"},
    };
    index = 0;
    for (const auto& entry : few_shot) {
        const auto parsed = sources::parse_few_shot(entry.raw);
        std::string got;
        for (const auto& token : parsed) {
            got += !token.valid() ? 'I' : *token.outcome == Decision::Yes ? 'Y' : 'N';
        }
        check.require(got == entry.expected, "few-shot case " + std::to_string(index) +
                                                 " parsed as '" + got + "' expected '" +
                                                 entry.expected + "'");
        ++index;
    }

    // Round-trip property over 1,000 random token lists.
    sources::Xoshiro256ss rng(180000);
    int round_trips = 0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = 1 + rng.next_u64() % 120;
        std::vector<Decision> tokens;
        std::string joined;
        for (std::size_t k = 0; k < n; ++k) {
            const Decision d = rng.bernoulli(0.5) ? Decision::Yes : Decision::No;
            tokens.push_back(d);
            if (k > 0) joined += ", ";
            joined += to_string(d);
        }
        const auto parsed = sources::parse_few_shot(joined);
        bool ok = parsed.size() == tokens.size();
        for (std::size_t k = 0; ok && k < tokens.size(); ++k) {
            ok = parsed[k].valid() && *parsed[k].outcome == tokens[k];
        }
        round_trips += ok;
    }
    check.require(round_trips == 1000,
                  "few-shot round-trip held for only " + std::to_string(round_trips) +
                      "/1000 token lists");
}

void criterion_11_crawl(Checker& check) {
    // Page 1: hand-counted 2 yes / 3 no in both modes (96 characters).
    const std::string page1 =
        "Yes we can. No, no! Nothing about yesterday counts, but a bare yes and a final NO "
        "do count here.";
    // Page 2: a "yes" straddling the 1000-character boundary (starts at
    // character 998), plus one "no" early on.
    std::string page2 = "no ";
    page2 += std::string(994, 'a');
    page2 += " yes";
    // Page 3: the same construction one character earlier, so the token ends
    // exactly at the boundary and survives truncation.
    std::string page3 = "no ";
    page3 += std::string(993, 'a');
    page3 += " yes";
    // Page 4: neither word.
    const std::string page4 = "silence and filler only";

    std::string archive;
    archive += warc_record("warcinfo", "", "acceptance fixture");
    archive += warc_record("conversion", "https://fixture/1", page1);
    archive += warc_record("conversion", "https://fixture/2", page2);
    archive += warc_record("conversion", "https://fixture/3", page3);
    archive += warc_record("conversion", "https://fixture/4", page4);

    for (const bool compressed : {false, true}) {
        std::istringstream in(compressed ? gzip_bytes(archive) : archive);
        crawl::WetReader reader(in);
        std::vector<crawl::WetRecord> records;
        while (auto record = reader.next()) records.push_back(std::move(*record));
        check.require(records.size() == 4, "fixture archive did not yield 4 text records");

        // Hand-counted truncated-mode and full-mode values.
        struct Expected {
            std::uint64_t yes_truncated, no_truncated, yes_full, no_full;
        };
        const Expected expected[] = {
            {2, 3, 2, 3},
            {0, 1, 1, 1},  // straddling token is clipped at 1000 chars
            {1, 1, 1, 1},  // token ending exactly at the boundary stays
            {0, 0, 0, 0},
        };
        std::vector<crawl::CrawlPageStats> truncated_pages;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto truncated = crawl::count_yes_no(records[i].text, 1000);
            const auto full = crawl::count_yes_no(records[i].text, std::nullopt);
            check.require(truncated.yes_count == expected[i].yes_truncated &&
                              truncated.no_count == expected[i].no_truncated,
                          "truncated counts wrong on fixture page " + std::to_string(i + 1));
            check.require(full.yes_count == expected[i].yes_full &&
                              full.no_count == expected[i].no_full,
                          "full-mode counts wrong on fixture page " + std::to_string(i + 1));
            truncated_pages.push_back({records[i].record_id, truncated.yes_count,
                                       truncated.no_count, true, truncated.chars_scanned});
        }

        const auto aggregate = crawl::aggregate_crawl(truncated_pages, 0.05);
        check.require(aggregate.pages == 4, "aggregate page count wrong");
        check.require(aggregate.total_yes == 3 && aggregate.total_no == 5,
                      "aggregate totals wrong");
        check.require(aggregate.corpus_yes_fraction &&
                          *aggregate.corpus_yes_fraction == 3.0 / 8.0,
                      "corpus yes fraction wrong");
        check.require(aggregate.neither_fraction == 0.25, "neither fraction wrong");
        // Conditional mean over the three pages with occurrences:
        // (2/5 + 0/1 + 1/2) / 3.
        const double conditional = (2.0 / 5.0 + 0.0 + 0.5) / 3.0;
        check.require(aggregate.mean_page_conditional &&
                          std::fabs(*aggregate.mean_page_conditional - conditional) < 1e-12,
                      "mean page conditional wrong");
        check.require(aggregate.uniformity_test.has_value(), "uniformity test missing");
    }
}

void criterion_12_end_to_end(Checker& check) {
    setenv("BINAUDIT_ACCEPT_KEY", "acceptance", 1);

    const auto build_one_shot_script = [] {
        std::vector<llm::ScriptedResponse> script;
        sources::Xoshiro256ss rng(190000);
        for (int i = 0; i < 200; ++i) {
            script.push_back({200, rng.bernoulli(0.5) ? "yes" : "no", 0});
        }
        return script;
    };
    const auto build_few_shot_script = [] {
        std::vector<llm::ScriptedResponse> script;
        sources::Xoshiro256ss rng(191000);
        for (int call = 0; call < 20; ++call) {
            std::string body;
            for (int i = 0; i < 100; ++i) {
                if (i > 0) body += ", ";
                body += rng.bernoulli(0.5) ? "yes" : "no";
            }
            script.push_back({200, body, 0});
        }
        return script;
    };

    const auto run_everything = [&](const std::string& tag) {
        llm::MockEndpoint one_shot_mock(build_one_shot_script());
        auto one_shot_config = config_for(one_shot_mock);
        one_shot_config.experiment_id = "e2e-one-shot";
        const auto one_shot = experiment::run_one_shot(
            one_shot_config, scratch("e2e-one-" + tag + ".jsonl"));

        llm::MockEndpoint few_shot_mock(build_few_shot_script());
        auto few_shot_config = config_for(few_shot_mock);
        few_shot_config.experiment_id = "e2e-few-shot";
        few_shot_config.mode = SamplingMode::FewShot;
        const auto few_shot = experiment::run_few_shot(
            few_shot_config, scratch("e2e-few-" + tag + ".jsonl"));

        experiment::ReportInputs inputs;
        inputs.experiments.push_back(&one_shot);
        inputs.experiments.push_back(&few_shot);
        return render_report(inputs, experiment::ReportFormat::Markdown);
    };

    const auto started = std::chrono::steady_clock::now();
    const std::string report = run_everything("a");
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    check.require(elapsed < 60.0,
                  "end-to-end run took " + format_seconds(elapsed) + " (limit 60s)");

    for (const char* section : {"Uniformity (HP1)", "Markov independence (HP2)", "Recency",
                                "Per-batch results", "Inter-batch summary"}) {
        check.require(report.find(section) != std::string::npos,
                      std::string("report is missing the '") + section + "' section");
    }

    const std::string rerun = run_everything("b");
    check.require(rerun == report, "re-running the same script changed the statistics");
}

void criterion_13_temperature_validation(Checker& check) {
    setenv("BINAUDIT_ACCEPT_KEY", "acceptance", 1);

    {
        llm::MockEndpoint mock({{200, "yes", 0}});
        llm::CompletionRequest request;
        request.prompt_text = "yes or no";
        request.temperature = 2.5;
        bool rejected = false;
        try {
            llm::complete(endpoint_for(mock), request);
        } catch (const llm::ConfigError&) {
            rejected = true;
        }
        check.require(rejected, "temperature 2.5 was not rejected locally");
        check.require(mock.request_count() == 0,
                      "a request with temperature > 2 reached the wire");
    }

    // The stock seven-setting sweep drives exactly 7 x 200 calls through
    // the mock.
    std::vector<llm::ScriptedResponse> script;
    sources::Xoshiro256ss rng(192000);
    for (int i = 0; i < 1400; ++i) {
        script.push_back({200, rng.bernoulli(0.5) ? "yes" : "no", 0});
    }
    llm::MockEndpoint mock(script);
    auto config = config_for(mock);
    config.experiment_id = "sweep-accept";
    const auto sweep = experiment::run_temperature_sweep(
        config, experiment::kSweepTemperatures, scratch("sweep"));
    check.require(sweep.entries.size() == 7, "sweep did not visit 7 settings");
    check.require(mock.request_count() == 1400,
                  "sweep issued " + std::to_string(mock.request_count()) +
                      " calls instead of 1400");
    check.require(!mock.overrun(), "sweep overran the scripted responses");

    bool sweep_rejected = false;
    try {
        experiment::run_temperature_sweep(config, {0.5, 2.5}, scratch("sweep-bad"));
    } catch (const std::invalid_argument&) {
        sweep_rejected = true;
    }
    check.require(sweep_rejected, "a sweep containing T=2.5 was not rejected");
    check.require(mock.request_count() == 1400,
                  "the rejected sweep still issued network calls");
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "chi-square arithmetic, one-shot table", criterion_1_table1_arithmetic},
        {2, "chi-square arithmetic, few-shot pooled table", criterion_2_table3_arithmetic},
        {3, "critical value p(3.841, 1) = 0.05", criterion_3_critical_value},
        {4, "boltzmann sampler and softmax properties", criterion_4_boltzmann},
        {5, "HP2 calibration and power (200 seeds)", criterion_5_hp2_calibration_and_power},
        {6, "HP1 calibration (500 seeds)", criterion_6_hp1_calibration},
        {7, "recency machinery vs brute-force oracle", criterion_7_recency_machinery},
        {8, "HP3 self, alternating, and fair-pair behaviour", criterion_8_hp3},
        {9, "degenerate all-yes pattern end-to-end", criterion_9_degenerate_end_to_end},
        {10, "parser fixture corpus and round-trip", criterion_10_parsers},
        {11, "crawl fixture counts and aggregates", criterion_11_crawl},
        {12, "full mock end-to-end under 60s, reproducible", criterion_12_end_to_end},
        {13, "temperature validation and sweep call count", criterion_13_temperature_validation},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        Checker check;
        const auto started = std::chrono::steady_clock::now();
        try {
            criterion.body(check);
        } catch (const std::exception& e) {
            check.require(false, std::string("unexpected exception: ") + e.what());
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        const bool passed = check.failures().empty();
        failures += !passed;
        std::cout << (passed ? "[PASS]" : "[FAIL]") << " criterion " << criterion.number
                  << ": " << criterion.name << " (" << format_seconds(elapsed) << ")\n";
        for (const auto& failure : check.failures()) {
            std::cout << "       - " << failure << "\n";
        }
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) +
                                                              " criteria failed")
              << "\n";
    return failures;
}
