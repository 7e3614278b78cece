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

#ifndef BINAUDIT_STATS_HPP
#define BINAUDIT_STATS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "binaudit/core.hpp"

namespace binaudit::stats {

inline constexpr double kDefaultAlpha = 0.05;

struct ChiSquareResult {
    double statistic = 0.0;
    int degrees_of_freedom = 1;
    double p_value = 1.0;
    double alpha = kDefaultAlpha;
    bool reject_null = false;
};

/// Adjacent-pair counts of a binary sequence; totals |S| - 1 (0 for |S| <= 1).
struct TransitionCounts {
    std::uint64_t n_yy = 0;
    std::uint64_t n_yn = 0;
    std::uint64_t n_ny = 0;
    std::uint64_t n_nn = 0;

    std::uint64_t total() const { return n_yy + n_yn + n_ny + n_nn; }
    bool operator==(const TransitionCounts&) const = default;
};

/// Outcome of the first-order independence test. `degenerate` is set (and
/// `chi_square` absent) when a row or column marginal of the 2x2 transition
/// table is zero, which leaves the statistic undefined.
struct MarkovTestResult {
    double p_yes = 0.0;
    std::optional<double> p_yes_given_yes;
    TransitionCounts counts;
    std::optional<ChiSquareResult> chi_square;
    bool degenerate = false;
    std::optional<std::string> degeneracy_reason;
};

/// Run qualification for window switching rates: AtLeast counts a position as
/// following a run of length w when the w preceding elements are equal; Exact
/// additionally requires the run not to extend further left.
enum class RunMode : std::uint8_t { AtLeast, Exact };

struct WindowSwitchRate {
    std::optional<double> switch_rate;
    std::uint64_t qualifying_positions = 0;
};

struct RecencyWindow {
    std::optional<double> switch_rate;
    std::uint64_t qualifying_positions = 0;
    std::optional<double> recency_effect;  // switch_rate - baseline, when defined
};

struct RecencyAnalysis {
    double baseline_rate = 0.0;
    std::map<int, RecencyWindow> per_window;  // keyed by window size w = 1..w_max
};

struct TTestResult {
    double t_statistic = 0.0;
    double degrees_of_freedom = 1.0;
    double p_value = 1.0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double alpha = kDefaultAlpha;
    bool reject_null = false;
    std::optional<std::string> note;  // degeneracy annotations
};

/// Upper-tail probability of the chi-square distribution, via the regularized
/// incomplete gamma function. Absolute error <= 1e-10 for df <= 10 and
/// statistic <= 500.
double chi_square_p_value(double statistic, int degrees_of_freedom);

/// Two-sided P(|T| >= |t|) for Student's t with (possibly fractional) df.
double student_t_two_sided_p_value(double t, double degrees_of_freedom);

/// Pearson goodness-of-fit test of yes/no counts against the fair 50/50
/// split, df = 1. Throws std::invalid_argument when both counts are zero.
ChiSquareResult chi_square_uniform(std::uint64_t yes_count, std::uint64_t no_count,
                                   double alpha = kDefaultAlpha);

TransitionCounts transition_counts(const BinarySequence& seq);

/// Pearson 2x2 independence test (previous outcome x current outcome) over
/// all adjacent pairs, df = 1, no continuity correction. Requires |S| >= 2.
MarkovTestResult markov_independence_test(const BinarySequence& seq, double alpha = kDefaultAlpha);

/// Fraction of adjacent pairs that differ. Requires |S| >= 2.
double baseline_switch_rate(const BinarySequence& seq);

/// Switching rate at positions following a run of length w. Requires
/// 1 <= w and |S| >= w + 1; the rate is absent when no position qualifies.
WindowSwitchRate window_switch_rate(const BinarySequence& seq, int w,
                                    RunMode mode = RunMode::AtLeast);

/// window switch rate minus baseline rate; absent when the former is absent.
std::optional<double> recency_effect(const BinarySequence& seq, int w,
                                     RunMode mode = RunMode::AtLeast);

/// Baseline plus per-window switching behaviour for w = 1..w_max. Windows too
/// large for the sequence, or with no qualifying positions, are reported
/// absent rather than failing. Requires |S| >= 2.
RecencyAnalysis recency_analysis(const BinarySequence& seq, int w_max = 5,
                                 RunMode mode = RunMode::AtLeast);

/// Per-position binary switch indicators at the qualifying positions of
/// window w; their mean is the window switching rate. This is the sample fed
/// to the two-sample comparison.
std::vector<double> switch_indicator_sample(const BinarySequence& seq, int w,
                                            RunMode mode = RunMode::AtLeast);

/// Welch's unequal-variance two-sample t-test, two-sided. Each sample needs
/// at least 2 values. Zero-variance pairs degrade gracefully: equal means
/// give t = 0, p = 1; unequal means give p = 0 with a degeneracy note.
TTestResult two_sample_t_test(std::span<const double> sample_a, std::span<const double> sample_b,
                              double alpha = kDefaultAlpha);

}  // namespace binaudit::stats

#endif  // BINAUDIT_STATS_HPP
