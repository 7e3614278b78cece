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

#include "binaudit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace binaudit::stats {

namespace {

constexpr int kMaxIterations = 1000;
constexpr double kEpsilon = 1e-16;
constexpr double kTiny = 1e-300;

// Lower regularized incomplete gamma P(a, x) by series expansion.
// Converges fast for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < kMaxIterations; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEpsilon) {
            break;
        }
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma Q(a, x) by modified Lentz continued
// fraction. Converges fast for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIterations; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEpsilon) {
            break;
        }
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double regularized_gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) {
        throw std::invalid_argument("regularized_gamma_q requires x >= 0 and a > 0");
    }
    if (x == 0.0) {
        return 1.0;
    }
    if (x < a + 1.0) {
        return 1.0 - gamma_p_series(a, x);
    }
    return gamma_q_continued_fraction(a, x);
}

// Continued fraction for the regularized incomplete beta function
// (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEpsilon) {
            break;
        }
    }
    return h;
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
        b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Unbiased sample variance (n - 1 denominator).
double sample_variance(std::span<const double> v, double mean) {
    double ss = 0.0;
    for (double x : v) {
        const double d = x - mean;
        ss += d * d;
    }
    return ss / static_cast<double>(v.size() - 1);
}

ChiSquareResult make_chi_square_result(double statistic, int df, double alpha) {
    const double p = chi_square_p_value(statistic, df);
    return ChiSquareResult{statistic, df, p, alpha, p < alpha};
}

bool run_qualifies(const BinarySequence& seq, std::size_t i, std::size_t w, RunMode mode) {
    const auto& s = seq.items;
    for (std::size_t k = i - w; k + 1 < i; ++k) {
        if (s[k] != s[k + 1]) {
            return false;
        }
    }
    if (mode == RunMode::Exact && i > w && s[i - w - 1] == s[i - w]) {
        return false;
    }
    return true;
}

}  // namespace

double chi_square_p_value(double statistic, int degrees_of_freedom) {
    if (statistic < 0.0) {
        throw std::invalid_argument("chi-square statistic must be non-negative");
    }
    if (degrees_of_freedom < 1) {
        throw std::invalid_argument("degrees of freedom must be positive");
    }
    return regularized_gamma_q(degrees_of_freedom / 2.0, statistic / 2.0);
}

double student_t_two_sided_p_value(double t, double degrees_of_freedom) {
    if (!(degrees_of_freedom > 0.0)) {
        throw std::invalid_argument("degrees of freedom must be positive");
    }
    if (std::isinf(t)) {
        return 0.0;
    }
    // P(|T| >= t) = I_{nu/(nu + t^2)}(nu/2, 1/2)
    const double nu = degrees_of_freedom;
    const double x = nu / (nu + t * t);
    return regularized_incomplete_beta(nu / 2.0, 0.5, x);
}

ChiSquareResult chi_square_uniform(std::uint64_t yes_count, std::uint64_t no_count, double alpha) {
    const std::uint64_t n = yes_count + no_count;
    if (n == 0) {
        throw std::invalid_argument("empty sample");
    }
    const double expected = static_cast<double>(n) / 2.0;
    const double dy = static_cast<double>(yes_count) - expected;
    const double dn = static_cast<double>(no_count) - expected;
    const double statistic = (dy * dy + dn * dn) / expected;
    return make_chi_square_result(statistic, 1, alpha);
}

TransitionCounts transition_counts(const BinarySequence& seq) {
    TransitionCounts c;
    const auto& s = seq.items;
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i - 1] == Decision::Yes) {
            (s[i] == Decision::Yes ? c.n_yy : c.n_yn) += 1;
        } else {
            (s[i] == Decision::Yes ? c.n_ny : c.n_nn) += 1;
        }
    }
    return c;
}

MarkovTestResult markov_independence_test(const BinarySequence& seq, double alpha) {
    if (seq.size() < 2) {
        throw std::invalid_argument("sequence too short");
    }
    MarkovTestResult result;
    result.counts = transition_counts(seq);
    const auto& c = result.counts;

    const std::uint64_t yes_total =
        static_cast<std::uint64_t>(std::count(seq.items.begin(), seq.items.end(), Decision::Yes));
    result.p_yes = static_cast<double>(yes_total) / static_cast<double>(seq.size());
    if (c.n_yy + c.n_yn > 0) {
        result.p_yes_given_yes =
            static_cast<double>(c.n_yy) / static_cast<double>(c.n_yy + c.n_yn);
    }

    const double row_y = static_cast<double>(c.n_yy + c.n_yn);
    const double row_n = static_cast<double>(c.n_ny + c.n_nn);
    const double col_y = static_cast<double>(c.n_yy + c.n_ny);
    const double col_n = static_cast<double>(c.n_yn + c.n_nn);
    if (row_y == 0 || row_n == 0 || col_y == 0 || col_n == 0) {
        result.degenerate = true;
        result.degeneracy_reason =
            "zero marginal in the 2x2 transition table; independence statistic undefined";
        return result;
    }

    const double n = static_cast<double>(c.total());
    const double ad_minus_bc = static_cast<double>(c.n_yy) * static_cast<double>(c.n_nn) -
                               static_cast<double>(c.n_yn) * static_cast<double>(c.n_ny);
    const double statistic = n * ad_minus_bc * ad_minus_bc / (row_y * row_n * col_y * col_n);
    result.chi_square = make_chi_square_result(statistic, 1, alpha);
    return result;
}

double baseline_switch_rate(const BinarySequence& seq) {
    if (seq.size() < 2) {
        throw std::invalid_argument("sequence too short");
    }
    const auto& s = seq.items;
    std::uint64_t switches = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        switches += s[i] != s[i - 1];
    }
    return static_cast<double>(switches) / static_cast<double>(s.size() - 1);
}

WindowSwitchRate window_switch_rate(const BinarySequence& seq, int w, RunMode mode) {
    if (w < 1 || seq.size() < static_cast<std::size_t>(w) + 1) {
        throw std::invalid_argument("window too large for sequence");
    }
    const auto& s = seq.items;
    const auto uw = static_cast<std::size_t>(w);
    std::uint64_t qualifying = 0;
    std::uint64_t switches = 0;
    for (std::size_t i = uw; i < s.size(); ++i) {
        if (!run_qualifies(seq, i, uw, mode)) {
            continue;
        }
        ++qualifying;
        switches += s[i] != s[i - 1];
    }
    WindowSwitchRate result;
    result.qualifying_positions = qualifying;
    if (qualifying > 0) {
        result.switch_rate = static_cast<double>(switches) / static_cast<double>(qualifying);
    }
    return result;
}

std::optional<double> recency_effect(const BinarySequence& seq, int w, RunMode mode) {
    const WindowSwitchRate wsr = window_switch_rate(seq, w, mode);
    if (!wsr.switch_rate) {
        return std::nullopt;
    }
    return *wsr.switch_rate - baseline_switch_rate(seq);
}

RecencyAnalysis recency_analysis(const BinarySequence& seq, int w_max, RunMode mode) {
    if (seq.size() < 2) {
        throw std::invalid_argument("sequence too short");
    }
    if (w_max < 1) {
        throw std::invalid_argument("w_max must be at least 1");
    }
    RecencyAnalysis analysis;
    analysis.baseline_rate = baseline_switch_rate(seq);
    for (int w = 1; w <= w_max; ++w) {
        RecencyWindow window;
        if (seq.size() >= static_cast<std::size_t>(w) + 1) {
            const WindowSwitchRate wsr = window_switch_rate(seq, w, mode);
            window.switch_rate = wsr.switch_rate;
            window.qualifying_positions = wsr.qualifying_positions;
            if (wsr.switch_rate) {
                window.recency_effect = *wsr.switch_rate - analysis.baseline_rate;
            }
        }
        analysis.per_window.emplace(w, window);
    }
    return analysis;
}

std::vector<double> switch_indicator_sample(const BinarySequence& seq, int w, RunMode mode) {
    if (w < 1 || seq.size() < static_cast<std::size_t>(w) + 1) {
        return {};
    }
    const auto& s = seq.items;
    const auto uw = static_cast<std::size_t>(w);
    std::vector<double> indicators;
    for (std::size_t i = uw; i < s.size(); ++i) {
        if (run_qualifies(seq, i, uw, mode)) {
            indicators.push_back(s[i] != s[i - 1] ? 1.0 : 0.0);
        }
    }
    return indicators;
}

TTestResult two_sample_t_test(std::span<const double> sample_a, std::span<const double> sample_b,
                              double alpha) {
    if (sample_a.size() < 2 || sample_b.size() < 2) {
        throw std::invalid_argument("insufficient sample");
    }
    const double na = static_cast<double>(sample_a.size());
    const double nb = static_cast<double>(sample_b.size());
    TTestResult result;
    result.alpha = alpha;
    result.mean_a = mean_of(sample_a);
    result.mean_b = mean_of(sample_b);
    const double va = sample_variance(sample_a, result.mean_a);
    const double vb = sample_variance(sample_b, result.mean_b);

    if (va == 0.0 && vb == 0.0) {
        result.degrees_of_freedom = na + nb - 2.0;
        if (result.mean_a == result.mean_b) {
            result.t_statistic = 0.0;
            result.p_value = 1.0;
        } else {
            result.t_statistic = result.mean_a > result.mean_b
                                     ? std::numeric_limits<double>::infinity()
                                     : -std::numeric_limits<double>::infinity();
            result.p_value = 0.0;
            result.note = "both sample variances are zero with unequal means";
        }
        result.reject_null = result.p_value < alpha;
        return result;
    }

    const double se_a = va / na;
    const double se_b = vb / nb;
    const double se2 = se_a + se_b;
    result.t_statistic = (result.mean_a - result.mean_b) / std::sqrt(se2);
    // Welch-Satterthwaite degrees of freedom.
    result.degrees_of_freedom =
        se2 * se2 / (se_a * se_a / (na - 1.0) + se_b * se_b / (nb - 1.0));
    result.p_value = student_t_two_sided_p_value(result.t_statistic, result.degrees_of_freedom);
    result.reject_null = result.p_value < alpha;
    return result;
}

}  // namespace binaudit::stats
