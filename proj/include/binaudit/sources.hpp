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

#ifndef BINAUDIT_SOURCES_HPP
#define BINAUDIT_SOURCES_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "binaudit/core.hpp"
#include "binaudit/llm_client.hpp"

namespace binaudit::sources {

/// xoshiro256** seeded through SplitMix64. The algorithm is fixed so that
/// seeded runs are bit-reproducible across platforms and releases; sampler
/// outputs feed calibration tests that depend on it.
class Xoshiro256ss {
  public:
    explicit Xoshiro256ss(std::uint64_t seed);

    std::uint64_t next_u64();
    /// Uniform double in [0, 1) with 53 random bits.
    double next_double();
    bool bernoulli(double p_true);

  private:
    std::array<std::uint64_t, 4> state_;
};

/// Synthetic decision source drawing from the temperature-scaled softmax of
/// fixed logits. Logit index 0 is Yes, index 1 is No.
struct BoltzmannSpec {
    std::vector<double> logits{0.0, 0.0};
    double temperature = 1.0;  // > 0
};

/// First-order chain with known dependence; the oracle source for the
/// independence test.
struct MarkovChainSpec {
    double p_initial_yes = 0.5;
    double p_yes_given_yes = 0.5;
    double p_yes_given_no = 0.5;
};

/// Replays raw responses recorded in an existing transcript.
struct ReplaySpec {
    std::filesystem::path transcript_path;
    SequenceFilter filter;
};

/// Reads a true-random sequence file (see import_external_random).
struct ExternalRandomSpec {
    std::filesystem::path path;
};

/// Live HTTP endpoint.
struct LiveSpec {
    llm::EndpointConfig endpoint;
};

struct SourceSpec {
    std::variant<LiveSpec, BoltzmannSpec, MarkovChainSpec, ReplaySpec, ExternalRandomSpec> variant =
        BoltzmannSpec{};
    std::optional<std::uint64_t> seed;
};

/// Temperature-scaled softmax sigma(z)_i = exp(z_i/T) / sum_j exp(z_j/T),
/// computed with max-subtraction. Components sum to 1 within 1e-12.
/// Throws std::invalid_argument for T <= 0, non-finite logits, or fewer than
/// two components.
std::vector<double> boltzmann_probability(std::span<const double> logits, double temperature);

/// n independent draws with P(Yes) = boltzmann_probability(...)[0].
BinarySequence sample_boltzmann(const BoltzmannSpec& spec, Xoshiro256ss& rng, std::size_t n);

/// First element ~ Bernoulli(p_initial_yes); each later element drawn from
/// the transition row selected by its predecessor.
BinarySequence sample_markov_chain(const MarkovChainSpec& spec, Xoshiro256ss& rng, std::size_t n);

/// Normalizes one raw completion to a decision: trims whitespace, strips
/// leading/trailing non-alphanumeric characters, then compares
/// case-insensitively against "yes" and "no". Anything else is Invalid with
/// the raw text preserved. Verbose completions that merely contain a yes/no
/// are deliberately Invalid, never substring-matched.
ParsedResponse parse_decision(std::string raw);

/// Splits a few-shot payload on commas and line breaks and parses each
/// non-empty token, preserving order. Fully unparseable payloads yield a
/// list of Invalid entries, not an error.
std::vector<ParsedResponse> parse_few_shot(const std::string& raw);

/// Reads a whitespace-separated sequence file. The alphabet is auto-detected
/// from the first token: "0"/"1" (1 = Yes, 0 = No) or "yes"/"no"
/// (case-insensitive). Tokens outside the detected alphabet are an error
/// naming the line and token position; mixed alphabets are rejected.
BinarySequence import_external_random(std::istream& in);
BinarySequence import_external_random_file(const std::filesystem::path& path);

}  // namespace binaudit::sources

#endif  // BINAUDIT_SOURCES_HPP
