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

#ifndef BINAUDIT_EXPERIMENT_HPP
#define BINAUDIT_EXPERIMENT_HPP

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "binaudit/core.hpp"
#include "binaudit/crawl.hpp"
#include "binaudit/llm_client.hpp"
#include "binaudit/sources.hpp"
#include "binaudit/stats.hpp"

namespace binaudit::experiment {

struct PromptSpec {
    std::string prompt_id;
    std::string prompt_text;
};

/// The two stock prompts, Q1 and Q2.
std::vector<PromptSpec> default_prompts();

inline constexpr const char* kDefaultFewShotTemplate =
    "Respond with exactly {batch_size} comma-separated answers, each either yes or no. "
    "{prompt_text}";

struct ExperimentConfig {
    std::string experiment_id = "experiment";
    std::variant<sources::SourceSpec, llm::EndpointConfig> source = sources::SourceSpec{};
    std::vector<PromptSpec> prompts = default_prompts();
    SamplingMode mode = SamplingMode::OneShot;
    int samples_per_prompt = 100;
    int batch_size = 100;      // few-shot
    int batches = 10;          // few-shot
    int inter_call_delay_ms = 1000;
    double temperature = 1.0;  // [0, 2]
    double alpha = stats::kDefaultAlpha;
    int recency_w_max = 5;
    stats::RunMode run_mode = stats::RunMode::AtLeast;
    std::optional<std::uint64_t> seed;
    std::string few_shot_template = kDefaultFewShotTemplate;
    int one_shot_max_tokens = 16;
    int few_shot_max_tokens = 2048;

    void validate() const;
    /// Label recorded in transcripts: the endpoint's model for live sources,
    /// the source kind for synthetic ones.
    std::string model_label() const;
};

ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config_file(const std::filesystem::path& path);

/// Where decisions come from during collection. One instance serves one
/// experiment; calls are strictly sequential.
class DecisionSource {
  public:
    virtual ~DecisionSource() = default;
    struct Reply {
        std::string raw_text;
        double latency_ms = 0.0;
    };
    /// `expected_samples` is 1 for one-shot calls and batch_size for
    /// few-shot calls; synthetic sources emit that many tokens.
    virtual Reply invoke(const std::string& prompt_id, const std::string& prompt_text,
                         double temperature, int max_output_tokens, int expected_samples) = 0;
};

std::unique_ptr<DecisionSource> make_source(const ExperimentConfig& config);

/// Seed recorded in transcripts: the source spec's seed, falling back to the
/// config's master seed. Absent for live/replay/external sources and for
/// unseeded synthetic runs.
std::optional<std::uint64_t> effective_seed(const ExperimentConfig& config);

struct PromptAnalysis {
    std::string prompt_id;
    std::uint64_t yes_count = 0;
    std::uint64_t no_count = 0;
    std::uint64_t invalid_count = 0;
    std::optional<stats::ChiSquareResult> uniformity;  // absent when no valid responses
    std::optional<stats::MarkovTestResult> markov;     // absent when |S| < 2
    std::optional<stats::RecencyAnalysis> recency;     // absent when |S| < 2
};

struct BatchAnalysis {
    std::string prompt_id;
    std::uint64_t batch_index = 0;
    std::string source_call_id;
    std::uint64_t yes_count = 0;
    std::uint64_t no_count = 0;
    std::uint64_t invalid_count = 0;
    std::uint64_t parsed_count = 0;
    std::optional<std::uint64_t> expected_count;  // known only when collection ran here
    bool length_mismatch = false;                 // flagged, still analyzed
    std::optional<stats::ChiSquareResult> uniformity;
    std::optional<stats::MarkovTestResult> markov;
};

struct ExperimentResult {
    std::string experiment_id;
    std::string model_id;
    SamplingMode mode = SamplingMode::OneShot;
    double temperature = 1.0;
    double alpha = stats::kDefaultAlpha;
    std::vector<PromptAnalysis> per_prompt;
    std::vector<BatchAnalysis> per_batch;  // few-shot only
    std::string transcript_path;
};

/// Issues 2 x samples_per_prompt calls strictly alternating between the
/// configured prompts (Q1 first), waiting inter_call_delay_ms between
/// consecutive calls, and writes every response to the transcript as it
/// arrives. On transport failure the transcript is flushed up to the failure
/// point before the error propagates.
ExperimentResult run_one_shot(const ExperimentConfig& config,
                              const std::filesystem::path& transcript_path);

/// Per prompt, issues `batches` calls each requesting batch_size
/// comma-separated answers. Batches whose parsed length differs from
/// batch_size are kept and flagged.
ExperimentResult run_few_shot(const ExperimentConfig& config,
                              const std::filesystem::path& transcript_path);

/// Recomputes the full battery from already-collected records (the analyze
/// path for saved transcripts). `expected_batch_size` enables length-mismatch
/// flagging when the intended batch size is known.
ExperimentResult analyze_records(const std::vector<ResponseRecord>& records, double alpha,
                                 int recency_w_max, stats::RunMode run_mode,
                                 std::optional<std::uint64_t> expected_batch_size = std::nullopt);

struct InterBatchSummary {
    double mean_yes_percent = 0.0;
    double mean_chi_square = 0.0;
    double max_chi_square = 0.0;
    std::uint64_t batches_rejecting_hp1 = 0;
    std::uint64_t batches_rejecting_hp2 = 0;  // degenerate batches count as rejecting
};

/// Arithmetic means/max over per-batch values. Throws std::invalid_argument
/// for one-shot input ("inter-batch requires few-shot").
InterBatchSummary inter_batch_summary(const ExperimentResult& result);

inline const std::vector<double> kSweepTemperatures = {0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};

struct SweepEntry {
    double temperature = 1.0;
    ExperimentResult result;
};

struct SweepResult {
    std::vector<SweepEntry> entries;
};

/// Runs the one-shot protocol at each temperature. All temperatures are
/// validated against [0, 2] before any call is issued. Per-temperature seeds
/// derive from the master seed plus the temperature's index so runs are
/// order-independent. One transcript per temperature is written under
/// transcript_dir.
SweepResult run_temperature_sweep(const ExperimentConfig& config,
                                  const std::vector<double>& temperatures,
                                  const std::filesystem::path& transcript_dir);

/// Two-column (temperature, p_yes) delimited block for one prompt,
/// plot-ready.
std::string sweep_plot_data(const SweepResult& sweep, const std::string& prompt_id);

struct WindowComparison {
    int w = 1;
    bool testable = false;
    std::string note;  // reason when not testable
    std::uint64_t qualifying_a = 0;
    std::uint64_t qualifying_b = 0;
    std::optional<stats::TTestResult> t_test;
};

struct RecencyComparison {
    double alpha = stats::kDefaultAlpha;
    stats::RecencyAnalysis analysis_a;
    stats::RecencyAnalysis analysis_b;
    std::vector<WindowComparison> per_window;
};

/// For each window w = 1..w_max with qualifying positions in both sequences,
/// Welch t-test on the two switch-indicator samples. Windows lacking
/// qualifying positions (or with fewer than two) in either sequence are
/// reported as not testable. Both sequences must have length >= 2.
RecencyComparison compare_recency(const BinarySequence& seq_a, const BinarySequence& seq_b,
                                  int w_max = 5, double alpha = stats::kDefaultAlpha,
                                  stats::RunMode mode = stats::RunMode::AtLeast);

enum class ReportFormat : std::uint8_t { Markdown, Delimited };

struct ReportInputs {
    std::vector<const ExperimentResult*> experiments;
    const SweepResult* sweep = nullptr;
    const RecencyComparison* comparison = nullptr;
    const crawl::CrawlAggregate* crawl_aggregate = nullptr;
};

/// Renders the battery results as tables. Pure function: identical inputs
/// give byte-identical output. Chi-square statistics print with 2 decimals,
/// p-values with 3 significant figures.
std::string render_report(const ReportInputs& inputs, ReportFormat format);

// Formatting helpers shared with the CLI (fixed precision documented above).
std::string format_chi_square(double statistic);
std::string format_p_value(double p);
std::string format_rate(double rate);

}  // namespace binaudit::experiment

#endif  // BINAUDIT_EXPERIMENT_HPP
