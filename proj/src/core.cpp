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

#include "binaudit/core.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace binaudit {

namespace {

using ordered_json = nlohmann::ordered_json;

// Transcript line schema, in emission order.
constexpr const char* kRequiredKeys[] = {
    "schema_version", "experiment_id", "model_id",          "prompt_id", "prompt_text",
    "mode",           "call_index",    "batch_index",       "position_in_batch",
    "temperature",    "raw_response",  "parsed",            "timestamp",
    "latency_ms",     "seed",
};

}  // namespace

std::string_view to_string(Decision d) {
    return d == Decision::Yes ? "yes" : "no";
}

Decision flipped(Decision d) {
    return d == Decision::Yes ? Decision::No : Decision::Yes;
}

std::string_view to_string(SamplingMode m) {
    return m == SamplingMode::OneShot ? "one-shot" : "few-shot";
}

SamplingMode sampling_mode_from_string(std::string_view s) {
    if (s == "one-shot") return SamplingMode::OneShot;
    if (s == "few-shot") return SamplingMode::FewShot;
    throw std::invalid_argument("unknown sampling mode '" + std::string(s) + "'");
}

TimestampMs now_utc_millis() {
    return std::chrono::time_point_cast<std::chrono::milliseconds>(
        std::chrono::system_clock::now());
}

std::string format_utc_millis(TimestampMs t) {
    const auto since_epoch = t.time_since_epoch();
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(since_epoch);
    const int millis = static_cast<int>((since_epoch - secs).count());
    const std::time_t tt = secs.count();
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, millis);
    return buf;
}

TimestampMs parse_utc_millis(const std::string& text) {
    std::tm tm{};
    int millis = 0;
    char zone = 0;
    // Fixed-width form only: YYYY-MM-DDTHH:MM:SS.mmmZ (24 characters).
    const int got = std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3d%c", &tm.tm_year,
                                &tm.tm_mon, &tm.tm_mday, &tm.tm_hour, &tm.tm_min, &tm.tm_sec,
                                &millis, &zone);
    if (text.size() != 24 || got != 8 || zone != 'Z') {
        throw std::invalid_argument("malformed timestamp '" + text + "' (expected ISO-8601 UTC "
                                    "with millisecond precision, e.g. 2024-07-18T00:00:00.000Z)");
    }
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    const std::time_t secs = timegm(&tm);
    return TimestampMs(std::chrono::seconds(secs) + std::chrono::milliseconds(millis));
}

void ResponseRecord::validate() const {
    const bool few_shot = mode == SamplingMode::FewShot;
    if (few_shot != batch_index.has_value() || few_shot != position_in_batch.has_value()) {
        throw std::invalid_argument(
            "record invariant violated: batch_index and position_in_batch must be present "
            "exactly when mode is few-shot");
    }
    if (!(temperature >= 0.0 && temperature <= 2.0)) {
        throw std::invalid_argument("record temperature " + std::to_string(temperature) +
                                    " outside [0, 2]");
    }
}

TranscriptError::TranscriptError(std::size_t line_number, const std::string& message)
    : std::runtime_error(line_number == 0 ? message
                                          : "line " + std::to_string(line_number) + ": " + message),
      line_number_(line_number) {}

namespace {

ordered_json record_to_json(const ResponseRecord& r) {
    ordered_json j;
    j["schema_version"] = std::string(kTranscriptSchemaVersion);
    j["experiment_id"] = r.experiment_id;
    j["model_id"] = r.model_id;
    j["prompt_id"] = r.prompt_id;
    j["prompt_text"] = r.prompt_text;
    j["mode"] = std::string(to_string(r.mode));
    j["call_index"] = r.call_index;
    if (r.batch_index) {
        j["batch_index"] = *r.batch_index;
    } else {
        j["batch_index"] = nullptr;
    }
    if (r.position_in_batch) {
        j["position_in_batch"] = *r.position_in_batch;
    } else {
        j["position_in_batch"] = nullptr;
    }
    j["temperature"] = r.temperature;
    j["raw_response"] = r.parsed.raw_text;
    j["parsed"] = r.parsed.valid() ? std::string(to_string(*r.parsed.outcome)) : "invalid";
    j["timestamp"] = format_utc_millis(r.timestamp);
    j["latency_ms"] = r.latency_ms;
    if (r.seed) {
        j["seed"] = *r.seed;
    } else {
        j["seed"] = nullptr;
    }
    return j;
}

ResponseRecord record_from_json(const ordered_json& j, std::size_t line_number) {
    for (const char* key : kRequiredKeys) {
        if (!j.contains(key)) {
            throw TranscriptError(line_number, std::string("missing field '") + key + "'");
        }
    }
    const auto field = [&](const char* key) -> const ordered_json& { return j.at(key); };
    try {
        const std::string version = field("schema_version").get<std::string>();
        if (version != kTranscriptSchemaVersion) {
            throw TranscriptError(line_number, "unknown schema_version '" + version + "'");
        }
        ResponseRecord r;
        r.experiment_id = field("experiment_id").get<std::string>();
        r.model_id = field("model_id").get<std::string>();
        r.prompt_id = field("prompt_id").get<std::string>();
        r.prompt_text = field("prompt_text").get<std::string>();
        r.mode = sampling_mode_from_string(field("mode").get<std::string>());
        r.call_index = field("call_index").get<std::uint64_t>();
        if (!field("batch_index").is_null()) {
            r.batch_index = field("batch_index").get<std::uint64_t>();
        }
        if (!field("position_in_batch").is_null()) {
            r.position_in_batch = field("position_in_batch").get<std::uint64_t>();
        }
        r.temperature = field("temperature").get<double>();
        r.parsed.raw_text = field("raw_response").get<std::string>();
        const std::string parsed = field("parsed").get<std::string>();
        if (parsed == "yes") {
            r.parsed.outcome = Decision::Yes;
        } else if (parsed == "no") {
            r.parsed.outcome = Decision::No;
        } else if (parsed != "invalid") {
            throw TranscriptError(line_number,
                                  "field 'parsed' must be yes|no|invalid, got '" + parsed + "'");
        }
        r.timestamp = parse_utc_millis(field("timestamp").get<std::string>());
        r.latency_ms = field("latency_ms").get<double>();
        if (!field("seed").is_null()) {
            r.seed = field("seed").get<std::uint64_t>();
        }
        r.validate();
        return r;
    } catch (const TranscriptError&) {
        throw;
    } catch (const std::exception& e) {
        throw TranscriptError(line_number, e.what());
    }
}

}  // namespace

TranscriptWriter::TranscriptWriter(std::ostream& out) : out_(&out) {}

void TranscriptWriter::write(const ResponseRecord& record) {
    record.validate();
    *out_ << record_to_json(record).dump() << '\n';
    if (!out_->good()) {
        throw TranscriptError(0, "sink write failure after " + std::to_string(count_) +
                                     " records written");
    }
    ++count_;
}

void TranscriptWriter::flush() {
    out_->flush();
}

std::size_t write_transcript(const std::vector<ResponseRecord>& records, std::ostream& out) {
    TranscriptWriter writer(out);
    for (const auto& r : records) {
        writer.write(r);
    }
    writer.flush();
    return writer.count();
}

std::size_t write_transcript_file(const std::vector<ResponseRecord>& records,
                                  const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw TranscriptError(0, "cannot open '" + path.string() + "' for writing");
    }
    return write_transcript(records, out);
}

std::vector<ResponseRecord> read_transcript(std::istream& in) {
    std::vector<ResponseRecord> records;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const std::exception& e) {
            throw TranscriptError(line_number, std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object()) {
            throw TranscriptError(line_number, "expected a JSON object");
        }
        records.push_back(record_from_json(j, line_number));
    }
    return records;
}

std::vector<ResponseRecord> read_transcript_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw TranscriptError(0, "cannot open '" + path.string() + "' for reading");
    }
    return read_transcript(in);
}

BinarySequence sequence_from_records(const std::vector<ResponseRecord>& records,
                                     const SequenceFilter& filter) {
    std::vector<const ResponseRecord*> selected;
    for (const auto& r : records) {
        if (r.prompt_id != filter.prompt_id || r.mode != filter.mode) {
            continue;
        }
        if (filter.batch_index && r.batch_index != filter.batch_index) {
            continue;
        }
        selected.push_back(&r);
    }
    std::stable_sort(selected.begin(), selected.end(),
                     [](const ResponseRecord* a, const ResponseRecord* b) {
                         const auto key = [](const ResponseRecord* r) {
                             return std::make_tuple(r->call_index, r->batch_index.value_or(0),
                                                    r->position_in_batch.value_or(0));
                         };
                         return key(a) < key(b);
                     });
    BinarySequence seq;
    for (const ResponseRecord* r : selected) {
        if (r->parsed.valid()) {
            seq.items.push_back(*r->parsed.outcome);
        } else {
            ++seq.excluded_invalid_count;
        }
    }
    return seq;
}

}  // namespace binaudit
