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

#include "binaudit/sources.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace binaudit::sources {

namespace {

// SplitMix64, used only to expand the user seed into generator state.
std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

bool is_ascii_alnum(unsigned char c) {
    return std::isalnum(c) != 0;
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Strips leading/trailing characters that are not ASCII alphanumerics
// (covers whitespace and punctuation in one pass).
std::string_view strip_non_alnum(std::string_view s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && !is_ascii_alnum(static_cast<unsigned char>(s[begin]))) {
        ++begin;
    }
    while (end > begin && !is_ascii_alnum(static_cast<unsigned char>(s[end - 1]))) {
        --end;
    }
    return s.substr(begin, end - begin);
}

void validate_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument(std::string(name) + " must be within [0, 1]");
    }
}

}  // namespace

Xoshiro256ss::Xoshiro256ss(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) {
        word = splitmix64(sm);
    }
}

std::uint64_t Xoshiro256ss::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Xoshiro256ss::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

bool Xoshiro256ss::bernoulli(double p_true) {
    return next_double() < p_true;
}

std::vector<double> boltzmann_probability(std::span<const double> logits, double temperature) {
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("temperature must be > 0");
    }
    if (logits.size() < 2) {
        throw std::invalid_argument("logit vector needs at least two components");
    }
    for (double z : logits) {
        if (!std::isfinite(z)) {
            throw std::invalid_argument("logits must be finite");
        }
    }
    const double beta = 1.0 / temperature;
    std::vector<double> scaled(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        scaled[i] = beta * logits[i];
    }
    const double m = *std::max_element(scaled.begin(), scaled.end());
    double total = 0.0;
    for (double& v : scaled) {
        v = std::exp(v - m);
        total += v;
    }
    for (double& v : scaled) {
        v /= total;
    }
    return scaled;
}

BinarySequence sample_boltzmann(const BoltzmannSpec& spec, Xoshiro256ss& rng, std::size_t n) {
    const std::vector<double> probs = boltzmann_probability(spec.logits, spec.temperature);
    const double p_yes = probs[0];
    BinarySequence seq;
    seq.items.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        seq.items.push_back(rng.bernoulli(p_yes) ? Decision::Yes : Decision::No);
    }
    return seq;
}

BinarySequence sample_markov_chain(const MarkovChainSpec& spec, Xoshiro256ss& rng, std::size_t n) {
    validate_probability(spec.p_initial_yes, "p_initial_yes");
    validate_probability(spec.p_yes_given_yes, "p_yes_given_yes");
    validate_probability(spec.p_yes_given_no, "p_yes_given_no");
    if (n < 1) {
        throw std::invalid_argument("sample count must be at least 1");
    }
    BinarySequence seq;
    seq.items.reserve(n);
    Decision current = rng.bernoulli(spec.p_initial_yes) ? Decision::Yes : Decision::No;
    seq.items.push_back(current);
    for (std::size_t i = 1; i < n; ++i) {
        const double p =
            current == Decision::Yes ? spec.p_yes_given_yes : spec.p_yes_given_no;
        current = rng.bernoulli(p) ? Decision::Yes : Decision::No;
        seq.items.push_back(current);
    }
    return seq;
}

ParsedResponse parse_decision(std::string raw) {
    ParsedResponse parsed;
    const std::string core = ascii_lower(strip_non_alnum(raw));
    if (core == "yes") {
        parsed.outcome = Decision::Yes;
    } else if (core == "no") {
        parsed.outcome = Decision::No;
    }
    parsed.raw_text = std::move(raw);
    return parsed;
}

std::vector<ParsedResponse> parse_few_shot(const std::string& raw) {
    std::vector<ParsedResponse> out;
    std::size_t token_start = 0;
    const auto flush = [&](std::size_t end) {
        std::string token = raw.substr(token_start, end - token_start);
        const bool blank = std::all_of(token.begin(), token.end(), [](unsigned char c) {
            return std::isspace(c) != 0;
        });
        if (!blank) {
            out.push_back(parse_decision(std::move(token)));
        }
    };
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == ',' || raw[i] == '\n' || raw[i] == '\r') {
            flush(i);
            token_start = i + 1;
        }
    }
    flush(raw.size());
    return out;
}

BinarySequence import_external_random(std::istream& in) {
    enum class Alphabet { Unknown, Digits, Words };
    Alphabet alphabet = Alphabet::Unknown;
    BinarySequence seq;
    std::string line;
    std::size_t line_number = 0;
    std::size_t token_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        std::istringstream tokens(line);
        std::string token;
        while (tokens >> token) {
            ++token_number;
            const std::string lowered = ascii_lower(token);
            Alphabet token_alphabet;
            Decision decision;
            if (lowered == "0" || lowered == "1") {
                token_alphabet = Alphabet::Digits;
                decision = lowered == "1" ? Decision::Yes : Decision::No;
            } else if (lowered == "yes" || lowered == "no") {
                token_alphabet = Alphabet::Words;
                decision = lowered == "yes" ? Decision::Yes : Decision::No;
            } else {
                throw std::invalid_argument(
                    "line " + std::to_string(line_number) + ", token " +
                    std::to_string(token_number) + ": '" + token +
                    "' is not in the sequence alphabet (expected 0/1 or yes/no)");
            }
            if (alphabet == Alphabet::Unknown) {
                alphabet = token_alphabet;
            } else if (alphabet != token_alphabet) {
                throw std::invalid_argument(
                    "line " + std::to_string(line_number) + ", token " +
                    std::to_string(token_number) + ": mixed alphabets ('" + token +
                    "' does not match the first token's alphabet)");
            }
            seq.items.push_back(decision);
        }
    }
    return seq;
}

BinarySequence import_external_random_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open sequence file '" + path.string() + "'");
    }
    return import_external_random(in);
}

}  // namespace binaudit::sources
