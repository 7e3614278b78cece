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

// binaudit: collect binary yes/no decisions from LLM endpoints or synthetic
// sources and evaluate them with a uniformity/independence/recency battery.
//
// Exit codes: 0 success; 1 rejections found under --strict; 2 usage error;
// 3 runtime/transport error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "binaudit/crawl.hpp"
#include "binaudit/experiment.hpp"
#include "binaudit/llm_client.hpp"
#include "binaudit/results_json.hpp"
#include "binaudit/sources.hpp"

namespace {

namespace fs = std::filesystem;
using namespace binaudit;

constexpr int kExitOk = 0;
constexpr int kExitStrictRejections = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    out << text;
    if (!out.good()) {
        throw std::runtime_error("failed writing '" + path.string() + "'");
    }
}

stats::RunMode run_mode_from_flag(const std::string& value) {
    if (value == "at-least") return stats::RunMode::AtLeast;
    if (value == "exact") return stats::RunMode::Exact;
    throw CLI::ValidationError("--run-mode", "must be 'at-least' or 'exact'");
}

void apply_common_overrides(experiment::ExperimentConfig& config,
                            const std::optional<std::string>& mode,
                            const std::optional<int>& delay_ms,
                            const std::optional<std::uint64_t>& seed,
                            const std::optional<double>& temperature) {
    if (mode) config.mode = sampling_mode_from_string(*mode);
    if (delay_ms) config.inter_call_delay_ms = *delay_ms;
    if (seed) config.seed = *seed;
    if (temperature) config.temperature = *temperature;
    config.validate();
}

void print_schedule(const experiment::ExperimentConfig& config) {
    if (config.mode == SamplingMode::OneShot) {
        const std::size_t calls = config.prompts.size() *
                                  static_cast<std::size_t>(config.samples_per_prompt);
        std::string prompt_ids;
        for (const auto& p : config.prompts) {
            if (!prompt_ids.empty()) prompt_ids += "/";
            prompt_ids += p.prompt_id;
        }
        std::cout << "plan: " << calls << " calls, alternating " << prompt_ids << ", "
                  << config.inter_call_delay_ms << "ms delay, temperature "
                  << config.temperature << "\n";
    } else {
        std::cout << "plan: " << config.prompts.size() * config.batches
                  << " calls (" << config.batches << " batches per prompt, " << config.batch_size
                  << " answers per batch), " << config.inter_call_delay_ms
                  << "ms delay between batches, temperature " << config.temperature << "\n";
    }
}

void print_experiment_summary(const experiment::ExperimentResult& result) {
    experiment::ReportInputs inputs;
    inputs.experiments.push_back(&result);
    std::cout << experiment::render_report(inputs, experiment::ReportFormat::Markdown);
}

bool any_hp1_rejection(const experiment::ExperimentResult& result) {
    for (const auto& prompt : result.per_prompt) {
        if (prompt.uniformity && prompt.uniformity->reject_null) return true;
    }
    for (const auto& batch : result.per_batch) {
        if (batch.uniformity && batch.uniformity->reject_null) return true;
    }
    return false;
}

int cmd_collect(const std::string& config_path, const std::string& out_path,
                const std::optional<std::string>& mode, const std::optional<int>& delay_ms,
                const std::optional<std::uint64_t>& seed,
                const std::optional<double>& temperature, bool dry_run) {
    auto config = experiment::load_config_file(config_path);
    apply_common_overrides(config, mode, delay_ms, seed, temperature);
    if (dry_run) {
        print_schedule(config);
        std::cout << "dry run: no calls issued, no transcript written\n";
        return kExitOk;
    }
    print_schedule(config);
    const auto result = config.mode == SamplingMode::OneShot
                            ? experiment::run_one_shot(config, out_path)
                            : experiment::run_few_shot(config, out_path);
    std::cout << "transcript written to " << out_path << "\n";
    print_experiment_summary(result);
    return kExitOk;
}

int cmd_analyze(const std::string& in_path, const std::string& out_path, double alpha,
                int windows, const std::string& run_mode_flag,
                const std::optional<std::uint64_t>& expected_batch_size, bool strict) {
    const auto records = read_transcript_file(in_path);
    if (records.empty()) {
        std::cerr << "error: empty transcript '" << in_path << "'\n";
        return kExitUsage;
    }
    const auto result = experiment::analyze_records(records, alpha, windows,
                                                    run_mode_from_flag(run_mode_flag),
                                                    expected_batch_size);
    experiment::ResultsDocument document;
    document.experiments.push_back(result);
    write_text_file(out_path, experiment::results_document_to_json_text(document));
    print_experiment_summary(result);
    std::cout << "results written to " << out_path << "\n";
    if (strict && any_hp1_rejection(result)) {
        std::cout << "strict mode: uniformity rejections present\n";
        return kExitStrictRejections;
    }
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_path,
              std::vector<double> temperatures, const std::string& transcript_dir,
              const std::optional<std::uint64_t>& seed, const std::optional<int>& delay_ms) {
    auto config = experiment::load_config_file(config_path);
    apply_common_overrides(config, std::nullopt, delay_ms, seed, std::nullopt);
    if (temperatures.empty()) {
        temperatures = experiment::kSweepTemperatures;
    }
    const fs::path dir =
        transcript_dir.empty() ? fs::path(out_path).parent_path() / "sweep-transcripts"
                               : fs::path(transcript_dir);
    const auto sweep = experiment::run_temperature_sweep(config, temperatures, dir);

    experiment::ResultsDocument document;
    document.sweep = sweep;
    write_text_file(out_path, experiment::results_document_to_json_text(document));

    // Plot-ready (temperature, p_yes) series, one file per prompt.
    for (const auto& prompt : config.prompts) {
        const fs::path plot_path =
            fs::path(out_path).replace_extension("plot-" + prompt.prompt_id + ".tsv");
        write_text_file(plot_path, experiment::sweep_plot_data(sweep, prompt.prompt_id));
        std::cout << "plot data for " << prompt.prompt_id << " written to "
                  << plot_path.string() << "\n";
    }
    experiment::ReportInputs inputs;
    inputs.sweep = &sweep;
    std::cout << experiment::render_report(inputs, experiment::ReportFormat::Markdown);
    std::cout << "results written to " << out_path << "\n";
    return kExitOk;
}

int cmd_simulate(const std::string& source_kind, std::vector<double> logits, double temperature,
                 double p_initial_yes, double p_yes_given_yes, double p_yes_given_no,
                 std::uint64_t n, std::uint64_t seed, const std::string& out_path,
                 const std::string& analysis_out, double alpha, int windows) {
    if (n == 0) {
        std::cerr << "error: --n must be positive\n";
        return kExitUsage;
    }
    sources::Xoshiro256ss rng(seed);
    BinarySequence sequence;
    if (source_kind == "boltzmann") {
        sources::BoltzmannSpec spec;
        if (!logits.empty()) spec.logits = std::move(logits);
        spec.temperature = temperature;
        sequence = sources::sample_boltzmann(spec, rng, n);
    } else if (source_kind == "markov") {
        sources::MarkovChainSpec spec;
        spec.p_initial_yes = p_initial_yes;
        spec.p_yes_given_yes = p_yes_given_yes;
        spec.p_yes_given_no = p_yes_given_no;
        sequence = sources::sample_markov_chain(spec, rng, n);
    } else {
        std::cerr << "error: --source must be boltzmann or markov\n";
        return kExitUsage;
    }

    // Sequence file in the external-random format, 1 = Yes.
    std::string text;
    for (std::size_t i = 0; i < sequence.items.size(); ++i) {
        text += sequence.items[i] == Decision::Yes ? '1' : '0';
        text += (i + 1) % 80 == 0 ? '\n' : ' ';
    }
    if (!text.empty() && text.back() == ' ') text.back() = '\n';
    write_text_file(out_path, text);
    std::cout << "sequence of " << sequence.items.size() << " decisions written to " << out_path
              << "\n";

    // Battery over the generated sequence, reported like a one-prompt run.
    experiment::ExperimentResult analysis;
    analysis.experiment_id = "simulate";
    analysis.model_id = "synthetic-" + source_kind;
    analysis.mode = SamplingMode::OneShot;
    analysis.temperature = source_kind == "boltzmann" ? temperature : 1.0;
    analysis.alpha = alpha;
    experiment::PromptAnalysis prompt;
    prompt.prompt_id = "S";
    prompt.yes_count = static_cast<std::uint64_t>(
        std::count(sequence.items.begin(), sequence.items.end(), Decision::Yes));
    prompt.no_count = sequence.items.size() - prompt.yes_count;
    prompt.uniformity = stats::chi_square_uniform(prompt.yes_count, prompt.no_count, alpha);
    if (sequence.size() >= 2) {
        prompt.markov = stats::markov_independence_test(sequence, alpha);
        prompt.recency = stats::recency_analysis(sequence, windows);
    }
    analysis.per_prompt.push_back(std::move(prompt));

    const auto& p = analysis.per_prompt.front();
    std::cout << "uniformity: chi2 " << experiment::format_chi_square(p.uniformity->statistic)
              << ", p " << experiment::format_p_value(p.uniformity->p_value) << ", "
              << (p.uniformity->reject_null ? "Reject H0" : "NotReject H0") << "\n";
    if (p.markov) {
        if (p.markov->degenerate) {
            std::cout << "markov: degenerate (" << *p.markov->degeneracy_reason << ")\n";
        } else {
            std::cout << "markov: chi2 "
                      << experiment::format_chi_square(p.markov->chi_square->statistic)
                      << ", p " << experiment::format_p_value(p.markov->chi_square->p_value)
                      << ", "
                      << (p.markov->chi_square->reject_null ? "Reject H0" : "NotReject H0")
                      << "\n";
        }
    }
    if (p.recency) {
        std::cout << "baseline switch rate: "
                  << experiment::format_rate(p.recency->baseline_rate) << "\n";
    }
    if (!analysis_out.empty()) {
        experiment::ResultsDocument document;
        document.experiments.push_back(std::move(analysis));
        write_text_file(analysis_out, experiment::results_document_to_json_text(document));
        std::cout << "analysis written to " << analysis_out << "\n";
    }
    return kExitOk;
}

int cmd_crawl(const std::vector<std::string>& wet_paths,
              const std::optional<std::uint64_t>& truncate_chars,
              const std::optional<std::uint64_t>& sample_limit, double alpha,
              const std::string& out_path, const std::string& pages_out) {
    std::vector<crawl::CrawlPageStats> pages;
    std::vector<std::string> warnings;
    for (const auto& wet_path : wet_paths) {
        if (sample_limit && pages.size() >= *sample_limit) break;
        std::ifstream in(wet_path, std::ios::binary);
        if (!in) {
            std::cerr << "error: cannot open WET archive '" << wet_path << "'\n";
            return kExitRuntime;
        }
        crawl::WetReader reader(in);
        while (auto record = reader.next()) {
            const auto counts = crawl::count_yes_no(record->text, truncate_chars);
            pages.push_back(crawl::CrawlPageStats{record->record_id, counts.yes_count,
                                                  counts.no_count, truncate_chars.has_value(),
                                                  counts.chars_scanned});
            if (sample_limit && pages.size() >= *sample_limit) break;
        }
        warnings.insert(warnings.end(), reader.warnings().begin(), reader.warnings().end());
    }
    for (const auto& warning : warnings) {
        std::cerr << "warning: " << warning << "\n";
    }
    const auto aggregate = crawl::aggregate_crawl(pages, alpha);

    experiment::ResultsDocument document;
    document.crawl_aggregate = aggregate;
    document.crawl_pages = pages;
    write_text_file(out_path, experiment::results_document_to_json_text(document));

    if (!pages_out.empty()) {
        std::string tsv = "record_id\tyes_count\tno_count\ttruncated\tchars_scanned\n";
        for (const auto& page : pages) {
            tsv += page.record_id + "\t" + std::to_string(page.yes_count) + "\t" +
                   std::to_string(page.no_count) + "\t" + (page.truncated ? "1" : "0") + "\t" +
                   std::to_string(page.chars_scanned) + "\n";
        }
        write_text_file(pages_out, tsv);
        std::cout << "per-page stats written to " << pages_out << "\n";
    }
    experiment::ReportInputs inputs;
    inputs.crawl_aggregate = &aggregate;
    std::cout << experiment::render_report(inputs, experiment::ReportFormat::Markdown);
    std::cout << "results written to " << out_path << "\n";
    return kExitOk;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, int windows, double alpha,
                const std::string& run_mode_flag, const std::string& out_path) {
    const auto seq_a = sources::import_external_random_file(a_path);
    const auto seq_b = sources::import_external_random_file(b_path);
    const auto comparison = experiment::compare_recency(seq_a, seq_b, windows, alpha,
                                                        run_mode_from_flag(run_mode_flag));
    experiment::ResultsDocument document;
    document.comparison = comparison;
    write_text_file(out_path, experiment::results_document_to_json_text(document));
    experiment::ReportInputs inputs;
    inputs.comparison = &comparison;
    std::cout << experiment::render_report(inputs, experiment::ReportFormat::Markdown);
    std::cout << "results written to " << out_path << "\n";
    return kExitOk;
}

int cmd_report(const std::string& in_path, const std::string& format_flag,
               const std::string& out_path) {
    std::ifstream in(in_path);
    if (!in) {
        std::cerr << "error: cannot open results file '" << in_path << "'\n";
        return kExitUsage;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const auto document = experiment::results_document_from_json_text(buffer.str());
    const auto format = format_flag == "delimited" ? experiment::ReportFormat::Delimited
                                                   : experiment::ReportFormat::Markdown;
    const std::string rendered = experiment::render_document(document, format);
    if (!out_path.empty()) {
        write_text_file(out_path, rendered);
        std::cout << "report written to " << out_path << "\n";
    } else {
        std::cout << rendered;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"binaudit: randomness battery for binary LLM decisions"};
    app.require_subcommand(1);

    // collect
    auto* collect = app.add_subcommand("collect", "run a collection protocol from a config file");
    std::string collect_config;
    std::string collect_out;
    std::optional<std::string> collect_mode;
    std::optional<int> collect_delay;
    std::optional<std::uint64_t> collect_seed;
    std::optional<double> collect_temperature;
    bool collect_dry_run = false;
    collect->add_option("--config", collect_config, "experiment config JSON")->required();
    collect->add_option("--out", collect_out, "transcript output path")->required();
    collect->add_option("--mode", collect_mode, "override: one-shot|few-shot");
    collect->add_option("--delay-ms", collect_delay, "override inter-call delay");
    collect->add_option("--seed", collect_seed, "override master seed");
    collect->add_option("--temperature", collect_temperature, "override temperature");
    collect->add_flag("--dry-run", collect_dry_run, "print the call schedule and exit");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "run the statistical battery on a transcript");
    std::string analyze_in;
    std::string analyze_out;
    double analyze_alpha = stats::kDefaultAlpha;
    int analyze_windows = 5;
    std::string analyze_run_mode = "at-least";
    std::optional<std::uint64_t> analyze_expected_batch;
    bool analyze_strict = false;
    analyze->add_option("--in", analyze_in, "transcript path")->required();
    analyze->add_option("--out", analyze_out, "results JSON output path")->required();
    analyze->add_option("--alpha", analyze_alpha, "significance level");
    analyze->add_option("--windows", analyze_windows, "max recency window size");
    analyze->add_option("--run-mode", analyze_run_mode, "at-least|exact");
    analyze->add_option("--expected-batch-size", analyze_expected_batch,
                        "flag few-shot batches deviating from this size");
    analyze->add_flag("--strict", analyze_strict, "exit 1 when any HP1 test rejects");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "one-shot runs across temperature settings");
    std::string sweep_config;
    std::string sweep_out;
    std::vector<double> sweep_temperatures;
    std::string sweep_transcript_dir;
    std::optional<std::uint64_t> sweep_seed;
    std::optional<int> sweep_delay;
    sweep->add_option("--config", sweep_config, "experiment config JSON")->required();
    sweep->add_option("--out", sweep_out, "results JSON output path")->required();
    sweep->add_option("--temperatures", sweep_temperatures,
                      "temperature list (default 0.5 0.75 1.0 1.25 1.5 1.75 2.0)");
    sweep->add_option("--transcript-dir", sweep_transcript_dir,
                      "directory for per-temperature transcripts");
    sweep->add_option("--seed", sweep_seed, "override master seed");
    sweep->add_option("--delay-ms", sweep_delay, "override inter-call delay");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "generate and analyze a synthetic sequence");
    std::string simulate_source;
    std::vector<double> simulate_logits;
    double simulate_temperature = 1.0;
    double simulate_p_init = 0.5;
    double simulate_p_yy = 0.5;
    double simulate_p_yn = 0.5;
    std::uint64_t simulate_n = 0;
    std::uint64_t simulate_seed = 0;
    std::string simulate_out;
    std::string simulate_analysis_out;
    double simulate_alpha = stats::kDefaultAlpha;
    int simulate_windows = 5;
    simulate->add_option("--source", simulate_source, "boltzmann|markov")->required();
    simulate->add_option("--logits", simulate_logits, "boltzmann logits (index 0 = yes)");
    simulate->add_option("--temperature", simulate_temperature, "boltzmann temperature");
    simulate->add_option("--p-init", simulate_p_init, "markov P(yes) for the first element");
    simulate->add_option("--p-yy", simulate_p_yy, "markov P(yes | previous yes)");
    simulate->add_option("--p-yn", simulate_p_yn, "markov P(yes | previous no)");
    simulate->add_option("--n", simulate_n, "sequence length")->required();
    simulate->add_option("--seed", simulate_seed, "generator seed");
    simulate->add_option("--out", simulate_out, "sequence file output path")->required();
    simulate->add_option("--analysis-out", simulate_analysis_out,
                         "optional results JSON for the generated sequence");
    simulate->add_option("--alpha", simulate_alpha, "significance level");
    simulate->add_option("--windows", simulate_windows, "max recency window size");

    // crawl
    auto* crawl_cmd = app.add_subcommand("crawl", "count yes/no words in WET archives");
    std::vector<std::string> crawl_wet;
    std::optional<std::uint64_t> crawl_truncate;
    std::optional<std::uint64_t> crawl_sample;
    double crawl_alpha = stats::kDefaultAlpha;
    std::string crawl_out;
    std::string crawl_pages_out;
    crawl_cmd->add_option("--wet", crawl_wet, "WET archive path(s)")->required();
    crawl_cmd->add_option("--truncate", crawl_truncate,
                          "scan only the first N characters per page");
    crawl_cmd->add_option("--sample", crawl_sample, "stop after N pages");
    crawl_cmd->add_option("--alpha", crawl_alpha, "significance level");
    crawl_cmd->add_option("--out", crawl_out, "results JSON output path")->required();
    crawl_cmd->add_option("--pages-out", crawl_pages_out, "per-page TSV output path");

    // compare
    auto* compare = app.add_subcommand("compare", "recency comparison of two sequence files");
    std::string compare_a;
    std::string compare_b;
    int compare_windows = 5;
    double compare_alpha = stats::kDefaultAlpha;
    std::string compare_run_mode = "at-least";
    std::string compare_out;
    compare->add_option("--a", compare_a, "first sequence file")->required();
    compare->add_option("--b", compare_b, "second sequence file")->required();
    compare->add_option("--windows", compare_windows, "max recency window size");
    compare->add_option("--alpha", compare_alpha, "significance level");
    compare->add_option("--run-mode", compare_run_mode, "at-least|exact");
    compare->add_option("--out", compare_out, "results JSON output path")->required();

    // report
    auto* report = app.add_subcommand("report", "render saved results JSON");
    std::string report_in;
    std::string report_format = "markdown";
    std::string report_out;
    report->add_option("--in", report_in, "results JSON path")->required();
    report->add_option("--format", report_format, "markdown|delimited");
    report->add_option("--out", report_out, "rendered report output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (collect->parsed()) {
            return cmd_collect(collect_config, collect_out, collect_mode, collect_delay,
                               collect_seed, collect_temperature, collect_dry_run);
        }
        if (analyze->parsed()) {
            return cmd_analyze(analyze_in, analyze_out, analyze_alpha, analyze_windows,
                               analyze_run_mode, analyze_expected_batch, analyze_strict);
        }
        if (sweep->parsed()) {
            return cmd_sweep(sweep_config, sweep_out, sweep_temperatures, sweep_transcript_dir,
                             sweep_seed, sweep_delay);
        }
        if (simulate->parsed()) {
            return cmd_simulate(simulate_source, simulate_logits, simulate_temperature,
                                simulate_p_init, simulate_p_yy, simulate_p_yn, simulate_n,
                                simulate_seed, simulate_out, simulate_analysis_out,
                                simulate_alpha, simulate_windows);
        }
        if (crawl_cmd->parsed()) {
            return cmd_crawl(crawl_wet, crawl_truncate, crawl_sample, crawl_alpha, crawl_out,
                             crawl_pages_out);
        }
        if (compare->parsed()) {
            return cmd_compare(compare_a, compare_b, compare_windows, compare_alpha,
                               compare_run_mode, compare_out);
        }
        if (report->parsed()) {
            return cmd_report(report_in, report_format, report_out);
        }
    } catch (const llm::TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const llm::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const TranscriptError& e) {
        std::cerr << "transcript error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const crawl::WarcError& e) {
        std::cerr << "archive error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
