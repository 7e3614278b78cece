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

#include <cmath>
#include <cstdio>
#include <sstream>

#include "binaudit/experiment.hpp"

namespace binaudit::experiment {

namespace {

std::string hp1_verdict(const std::optional<stats::ChiSquareResult>& test) {
    if (!test) return "n/a";
    return test->reject_null ? "Reject H0" : "NotReject H0";
}

// Degenerate tables render as "Reject*", matching the footnote convention
// for near-perfect dependence.
std::string hp2_verdict(const std::optional<stats::MarkovTestResult>& test) {
    if (!test) return "n/a";
    if (test->degenerate) return "Reject*";
    return test->chi_square->reject_null ? "Reject H0" : "NotReject H0";
}

std::string markov_chi(const std::optional<stats::MarkovTestResult>& test) {
    if (!test || !test->chi_square) return "-";
    return format_chi_square(test->chi_square->statistic);
}

std::string yy_over_n(const stats::MarkovTestResult& test) {
    return std::to_string(test.counts.n_yy) + "/" +
           std::to_string(test.counts.n_yy + test.counts.n_yn);
}

std::string optional_rate(const std::optional<double>& value) {
    return value ? format_rate(*value) : "-";
}

std::string format_t(double t) {
    if (std::isinf(t)) {
        return t > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", t);
    return buf;
}

// Emits both output flavors from one table description.
class TableBuilder {
  public:
    TableBuilder(ReportFormat format, std::ostream& out) : format_(format), out_(out) {}

    void section(const std::string& title) {
        if (format_ == ReportFormat::Markdown) {
            out_ << "\n## " << title << "\n\n";
        } else {
            out_ << "# section\t" << title << '\n';
        }
    }

    void line(const std::string& text) {
        if (format_ == ReportFormat::Markdown) {
            out_ << text << "\n";
        } else {
            out_ << "# note\t" << text << '\n';
        }
    }

    void header(const std::vector<std::string>& cells) {
        row_impl(cells);
        if (format_ == ReportFormat::Markdown) {
            out_ << '|';
            for (std::size_t i = 0; i < cells.size(); ++i) {
                out_ << " --- |";
            }
            out_ << '\n';
        }
    }

    void row(const std::vector<std::string>& cells) { row_impl(cells); }

  private:
    void row_impl(const std::vector<std::string>& cells) {
        if (format_ == ReportFormat::Markdown) {
            out_ << '|';
            for (const auto& cell : cells) {
                out_ << ' ' << cell << " |";
            }
            out_ << '\n';
        } else {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i > 0) out_ << '\t';
                out_ << cells[i];
            }
            out_ << '\n';
        }
    }

    ReportFormat format_;
    std::ostream& out_;
};

void render_experiment(const ExperimentResult& result, TableBuilder& table) {
    table.section("Experiment " + result.experiment_id + " (" +
                  std::string(to_string(result.mode)) + ", model " + result.model_id +
                  ", T=" + format_rate(result.temperature) + ")");

    table.line("Uniformity (HP1), H0: p_yes = p_no = 0.5");
    table.header({"Prompt", "Yes", "No", "Invalid", "chi2", "p-value", "Result"});
    for (const auto& prompt : result.per_prompt) {
        std::vector<std::string> row{prompt.prompt_id, std::to_string(prompt.yes_count),
                                     std::to_string(prompt.no_count),
                                     std::to_string(prompt.invalid_count)};
        if (prompt.uniformity) {
            row.push_back(format_chi_square(prompt.uniformity->statistic));
            row.push_back(format_p_value(prompt.uniformity->p_value));
        } else {
            row.push_back("-");
            row.push_back("-");
        }
        row.push_back(hp1_verdict(prompt.uniformity));
        table.row(row);
    }

    table.line("Markov independence (HP2), H0: current response independent of previous");
    table.header({"Prompt", "P(Y)", "E[P(Y|Y)]", "chi2", "YY/n", "Result"});
    for (const auto& prompt : result.per_prompt) {
        std::vector<std::string> row{prompt.prompt_id};
        if (prompt.markov) {
            row.push_back(format_rate(prompt.markov->p_yes));
            row.push_back(optional_rate(prompt.markov->p_yes_given_yes));
            row.push_back(markov_chi(prompt.markov));
            row.push_back(yy_over_n(*prompt.markov));
        } else {
            row.insert(row.end(), {"-", "-", "-", "-"});
        }
        row.push_back(hp2_verdict(prompt.markov));
        table.row(row);
    }
    table.line("(* flagged degenerate: a zero marginal leaves the statistic undefined; "
               "reported as near-perfect dependence)");

    table.line("Recency (switch rates after runs of length w)");
    table.header({"Prompt", "w", "Qualifying", "Switch rate", "Effect"});
    for (const auto& prompt : result.per_prompt) {
        if (!prompt.recency) {
            table.row({prompt.prompt_id, "-", "-", "-", "-"});
            continue;
        }
        table.row({prompt.prompt_id, "baseline", "-",
                   format_rate(prompt.recency->baseline_rate), "-"});
        for (const auto& [w, window] : prompt.recency->per_window) {
            table.row({prompt.prompt_id, std::to_string(w),
                       std::to_string(window.qualifying_positions),
                       optional_rate(window.switch_rate), optional_rate(window.recency_effect)});
        }
    }

    if (result.mode == SamplingMode::FewShot) {
        table.line("Per-batch results");
        if (result.per_batch.empty()) {
            table.line("no batches");
        } else {
            table.header({"Prompt", "Batch", "Yes", "No", "Invalid", "chi2", "p-value", "HP1",
                          "HP2", "Flag"});
            for (const auto& batch : result.per_batch) {
                std::vector<std::string> row{batch.prompt_id, std::to_string(batch.batch_index),
                                             std::to_string(batch.yes_count),
                                             std::to_string(batch.no_count),
                                             std::to_string(batch.invalid_count)};
                if (batch.uniformity) {
                    row.push_back(format_chi_square(batch.uniformity->statistic));
                    row.push_back(format_p_value(batch.uniformity->p_value));
                } else {
                    row.push_back("-");
                    row.push_back("-");
                }
                row.push_back(hp1_verdict(batch.uniformity));
                row.push_back(hp2_verdict(batch.markov));
                row.push_back(batch.length_mismatch
                                  ? "length mismatch (" + std::to_string(batch.parsed_count) +
                                        "/" + std::to_string(*batch.expected_count) + ")"
                                  : "");
                table.row(row);
            }
            const InterBatchSummary summary = inter_batch_summary(result);
            table.line("Inter-batch summary: mean Yes% " + format_rate(summary.mean_yes_percent) +
                       ", mean chi2 " + format_chi_square(summary.mean_chi_square) +
                       ", max chi2 " + format_chi_square(summary.max_chi_square) +
                       ", HP1 rejections " + std::to_string(summary.batches_rejecting_hp1) +
                       ", HP2 rejections " + std::to_string(summary.batches_rejecting_hp2));
        }
    }
}

void render_sweep(const SweepResult& sweep, TableBuilder& table) {
    table.section("Temperature sweep");
    table.header({"Temperature", "Prompt", "P(Y)", "P(Y|Y)", "YY/n", "HP1", "HP2"});
    for (const auto& entry : sweep.entries) {
        for (const auto& prompt : entry.result.per_prompt) {
            std::vector<std::string> row{format_rate(entry.temperature), prompt.prompt_id};
            if (prompt.markov) {
                row.push_back(format_rate(prompt.markov->p_yes));
                row.push_back(optional_rate(prompt.markov->p_yes_given_yes));
                row.push_back(yy_over_n(*prompt.markov));
            } else {
                const std::uint64_t valid = prompt.yes_count + prompt.no_count;
                row.push_back(valid > 0 ? format_rate(static_cast<double>(prompt.yes_count) /
                                                      static_cast<double>(valid))
                                        : "-");
                row.push_back("-");
                row.push_back("-");
            }
            row.push_back(hp1_verdict(prompt.uniformity));
            row.push_back(hp2_verdict(prompt.markov));
            table.row(row);
        }
    }
}

void render_comparison(const RecencyComparison& comparison, TableBuilder& table) {
    table.section("Recency comparison (HP3), H0: mean switching rates after runs are equal");
    table.line("Baseline switch rates: a=" + format_rate(comparison.analysis_a.baseline_rate) +
               ", b=" + format_rate(comparison.analysis_b.baseline_rate));
    table.header({"w", "Qual. a", "Qual. b", "Rate a", "Rate b", "Effect a", "Effect b", "t",
                  "df", "p-value", "Result"});
    for (const auto& window : comparison.per_window) {
        std::vector<std::string> row{std::to_string(window.w),
                                     std::to_string(window.qualifying_a),
                                     std::to_string(window.qualifying_b)};
        const auto field = [](const stats::RecencyAnalysis& analysis, int w,
                              bool effect) -> std::string {
            const auto it = analysis.per_window.find(w);
            if (it == analysis.per_window.end()) return "-";
            const auto& value = effect ? it->second.recency_effect : it->second.switch_rate;
            return value ? format_rate(*value) : "-";
        };
        row.push_back(field(comparison.analysis_a, window.w, false));
        row.push_back(field(comparison.analysis_b, window.w, false));
        row.push_back(field(comparison.analysis_a, window.w, true));
        row.push_back(field(comparison.analysis_b, window.w, true));
        if (window.testable && window.t_test) {
            row.push_back(format_t(window.t_test->t_statistic));
            row.push_back(format_rate(window.t_test->degrees_of_freedom));
            row.push_back(format_p_value(window.t_test->p_value));
            row.push_back(window.t_test->reject_null ? "Reject H0" : "NotReject H0");
        } else {
            row.insert(row.end(), {"-", "-", "-", "not testable (" + window.note + ")"});
        }
        table.row(row);
    }
}

void render_crawl(const crawl::CrawlAggregate& aggregate, TableBuilder& table) {
    table.section("Crawl yes/no occurrences");
    table.header({"Pages", "Yes", "No", "Prob.", "No Word %", "Cond. Prob."});
    const auto percent = [](double fraction) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * fraction);
        return std::string(buf);
    };
    table.row({std::to_string(aggregate.pages), std::to_string(aggregate.total_yes),
               std::to_string(aggregate.total_no),
               aggregate.corpus_yes_fraction ? percent(*aggregate.corpus_yes_fraction) : "-",
               percent(aggregate.neither_fraction),
               aggregate.mean_page_conditional ? percent(*aggregate.mean_page_conditional)
                                               : "-"});
    if (aggregate.uniformity_test) {
        table.line("Uniformity of pooled counts: chi2 " +
                   format_chi_square(aggregate.uniformity_test->statistic) + ", p " +
                   format_p_value(aggregate.uniformity_test->p_value) + ", " +
                   (aggregate.uniformity_test->reject_null ? "Reject H0" : "NotReject H0"));
    } else {
        table.line("No page contained either word; pooled uniformity test undefined");
    }
}

}  // namespace

std::string format_chi_square(double statistic) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", statistic);
    return buf;
}

std::string format_p_value(double p) {
    if (p == 0.0) {
        return "0";
    }
    char buf[64];
    if (p >= 1e-3) {
        std::snprintf(buf, sizeof(buf), "%.3g", p);
        return buf;
    }
    // Small p-values in compact scientific notation: 3.18e-4, 1.13e-22.
    std::snprintf(buf, sizeof(buf), "%.2e", p);
    std::string text = buf;
    const auto e = text.find('e');
    const std::string mantissa = text.substr(0, e);
    std::string exponent = text.substr(e + 1);
    bool negative = false;
    if (!exponent.empty() && (exponent[0] == '-' || exponent[0] == '+')) {
        negative = exponent[0] == '-';
        exponent.erase(0, 1);
    }
    while (exponent.size() > 1 && exponent[0] == '0') {
        exponent.erase(0, 1);
    }
    return mantissa + "e" + (negative ? "-" : "+") + exponent;
}

std::string format_rate(double rate) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", rate);
    // Trim trailing zeros but keep at least one decimal.
    std::string text = buf;
    while (text.size() > 1 && text.back() == '0' && text[text.size() - 2] != '.') {
        text.pop_back();
    }
    return text;
}

std::string render_report(const ReportInputs& inputs, ReportFormat format) {
    std::ostringstream out;
    if (format == ReportFormat::Markdown) {
        out << "# Binary decision randomness report\n";
    } else {
        out << "# binaudit report\n";
    }
    TableBuilder table(format, out);
    for (const ExperimentResult* result : inputs.experiments) {
        render_experiment(*result, table);
    }
    if (inputs.sweep != nullptr) {
        render_sweep(*inputs.sweep, table);
    }
    if (inputs.comparison != nullptr) {
        render_comparison(*inputs.comparison, table);
    }
    if (inputs.crawl_aggregate != nullptr) {
        render_crawl(*inputs.crawl_aggregate, table);
    }
    return out.str();
}

}  // namespace binaudit::experiment
