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

#ifndef BINAUDIT_CRAWL_HPP
#define BINAUDIT_CRAWL_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "binaudit/stats.hpp"

namespace binaudit::crawl {

/// Raised on corrupt WARC framing; carries the offset into the decompressed
/// stream where parsing failed.
class WarcError : public std::runtime_error {
  public:
    WarcError(std::uint64_t byte_offset, const std::string& message);
    std::uint64_t byte_offset() const { return byte_offset_; }

  private:
    std::uint64_t byte_offset_;
};

struct WetRecord {
    std::string record_id;  // WARC-Target-URI when present, else WARC-Record-ID
    std::string text;       // payload decoded as UTF-8, invalid bytes replaced
};

/// Streams the text ("conversion") records of a WET archive. Input may be
/// gzip-compressed (member-concatenated archives are handled) or plain;
/// detection is by magic bytes. Truncated final records are skipped with a
/// warning rather than an error.
class WetReader {
  public:
    explicit WetReader(std::istream& in);
    ~WetReader();
    WetReader(const WetReader&) = delete;
    WetReader& operator=(const WetReader&) = delete;

    std::optional<WetRecord> next();
    const std::vector<std::string>& warnings() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct YesNoCounts {
    std::uint64_t yes_count = 0;
    std::uint64_t no_count = 0;
    std::uint64_t chars_scanned = 0;
};

/// Counts whole-word, case-insensitive "yes"/"no" occurrences in the first
/// min(|text|, truncate_chars) characters (all characters when absent).
/// Tokens are maximal alphabetic runs; any non-alphabetic character is a
/// boundary, so "yesterday" and "nothing" never count. Truncation is applied
/// in characters (code points); a token straddling the boundary is
/// incomplete and is not counted, which keeps counts monotone in the
/// truncation length.
YesNoCounts count_yes_no(std::string_view text, std::optional<std::uint64_t> truncate_chars);

struct CrawlPageStats {
    std::string record_id;
    std::uint64_t yes_count = 0;
    std::uint64_t no_count = 0;
    bool truncated = false;
    std::uint64_t chars_scanned = 0;
};

struct CrawlAggregate {
    std::uint64_t pages = 0;
    std::uint64_t total_yes = 0;
    std::uint64_t total_no = 0;
    /// total_yes / (total_yes + total_no); absent when no page contains
    /// either word.
    std::optional<double> corpus_yes_fraction;
    /// Fraction of pages containing neither word.
    double neither_fraction = 0.0;
    /// Mean over pages with at least one occurrence of per-page yes/(yes+no).
    std::optional<double> mean_page_conditional;
    /// Uniformity test of the pooled counts; absent when the pool is empty.
    std::optional<stats::ChiSquareResult> uniformity_test;
};

/// Corpus-level totals and fractions. Throws std::invalid_argument on an
/// empty corpus.
CrawlAggregate aggregate_crawl(const std::vector<CrawlPageStats>& pages,
                               double alpha = stats::kDefaultAlpha);

/// Replaces invalid UTF-8 byte sequences with U+FFFD.
std::string utf8_sanitize(std::string_view bytes);

}  // namespace binaudit::crawl

#endif  // BINAUDIT_CRAWL_HPP
