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

#ifndef BINAUDIT_CORE_HPP
#define BINAUDIT_CORE_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace binaudit {

/// A single binary outcome. Exactly two states; nothing else is representable.
enum class Decision : std::uint8_t { Yes, No };

std::string_view to_string(Decision d);
Decision flipped(Decision d);

/// Result of parsing one raw model output. `outcome` is empty when the text
/// did not normalize to a bare yes/no token; `raw_text` is always the
/// original payload, byte for byte.
struct ParsedResponse {
    std::optional<Decision> outcome;
    std::string raw_text;

    bool valid() const { return outcome.has_value(); }
    bool operator==(const ParsedResponse&) const = default;
};

enum class SamplingMode : std::uint8_t { OneShot, FewShot };

std::string_view to_string(SamplingMode m);
SamplingMode sampling_mode_from_string(std::string_view s);

/// UTC wall-clock instant at millisecond precision.
using TimestampMs =
    std::chrono::time_point<std::chrono::system_clock, std::chrono::milliseconds>;

TimestampMs now_utc_millis();
std::string format_utc_millis(TimestampMs t);
TimestampMs parse_utc_millis(const std::string& text);

/// One collected response with full provenance. This is the unit stored in
/// transcript files.
struct ResponseRecord {
    std::string experiment_id;
    std::string model_id;
    std::string prompt_id;   // "Q1", "Q2", or a custom label
    std::string prompt_text;
    SamplingMode mode = SamplingMode::OneShot;
    std::uint64_t call_index = 0;
    std::optional<std::uint64_t> batch_index;        // few-shot only
    std::optional<std::uint64_t> position_in_batch;  // few-shot only
    double temperature = 1.0;                        // [0, 2]
    ParsedResponse parsed;
    TimestampMs timestamp{};
    double latency_ms = 0.0;
    std::optional<std::uint64_t> seed;  // synthetic sources only

    /// Throws std::invalid_argument on invariant violations (mode/batch field
    /// consistency, temperature range).
    void validate() const;

    bool operator==(const ResponseRecord&) const = default;
};

/// An ordered sequence of valid decisions. Invalid responses never enter
/// `items`; they are tallied in `excluded_invalid_count` instead.
struct BinarySequence {
    std::vector<Decision> items;
    std::uint64_t excluded_invalid_count = 0;

    std::size_t size() const { return items.size(); }
    bool operator==(const BinarySequence&) const = default;
};

/// One few-shot API call's worth of decisions.
struct Batch {
    std::uint64_t batch_index = 0;
    BinarySequence sequence;
    std::string source_call_id;
};

inline constexpr std::string_view kTranscriptSchemaVersion = "1";

/// Raised by transcript I/O. `line_number` is 1-based, 0 when not tied to a
/// specific line.
class TranscriptError : public std::runtime_error {
  public:
    TranscriptError(std::size_t line_number, const std::string& message);
    std::size_t line_number() const { return line_number_; }

  private:
    std::size_t line_number_;
};

/// Streaming transcript writer: one JSON object per line. Throws
/// TranscriptError carrying the partial-write count if the sink fails.
class TranscriptWriter {
  public:
    explicit TranscriptWriter(std::ostream& out);
    void write(const ResponseRecord& record);
    void flush();
    std::size_t count() const { return count_; }

  private:
    std::ostream* out_;
    std::size_t count_ = 0;
};

std::size_t write_transcript(const std::vector<ResponseRecord>& records, std::ostream& out);
std::size_t write_transcript_file(const std::vector<ResponseRecord>& records,
                                  const std::filesystem::path& path);

std::vector<ResponseRecord> read_transcript(std::istream& in);
std::vector<ResponseRecord> read_transcript_file(const std::filesystem::path& path);

/// Selects the records that feed one analyzed sequence.
struct SequenceFilter {
    std::string prompt_id;
    SamplingMode mode = SamplingMode::OneShot;
    std::optional<std::uint64_t> batch_index;
};

/// Extracts the decisions matching `filter` in collection order (call_index,
/// then batch_index, then position_in_batch). Invalid responses are excluded
/// and counted, never silently dropped.
BinarySequence sequence_from_records(const std::vector<ResponseRecord>& records,
                                     const SequenceFilter& filter);

}  // namespace binaudit

#endif  // BINAUDIT_CORE_HPP
