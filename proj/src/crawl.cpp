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

#include "binaudit/crawl.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <istream>
#include <limits>
#include <map>

#include <zlib.h>

namespace binaudit::crawl {

namespace {

constexpr std::size_t kIoChunk = std::size_t{64} * 1024;
constexpr std::string_view kReplacementChar = "\xEF\xBF\xBD";  // U+FFFD

// Incremental reader over a possibly gzip-compressed stream. Concatenated
// gzip members are decoded back to back; non-gzip input passes through.
class DecodingReader {
  public:
    explicit DecodingReader(std::istream& in) : in_(in) {
        int c0 = in_.peek();
        if (c0 == 0x1f) {
            gzip_ = true;
            std::memset(&strm_, 0, sizeof(strm_));
            // 16 + MAX_WBITS selects gzip framing.
            if (inflateInit2(&strm_, 16 + MAX_WBITS) != Z_OK) {
                throw std::runtime_error("zlib initialization failed");
            }
            inflate_ready_ = true;
        }
    }

    ~DecodingReader() {
        if (inflate_ready_) {
            inflateEnd(&strm_);
        }
    }

    DecodingReader(const DecodingReader&) = delete;
    DecodingReader& operator=(const DecodingReader&) = delete;

    /// Offset of the next unread byte in the decoded stream.
    std::uint64_t offset() const { return offset_; }

    /// Reads one line, stripping the trailing \n and \r. Returns false at
    /// end of stream with no data.
    bool read_line(std::string& line) {
        line.clear();
        while (true) {
            if (pos_ == buffer_.size() && !refill()) {
                return !line.empty();
            }
            const char c = buffer_[pos_++];
            ++offset_;
            if (c == '\n') {
                if (!line.empty() && line.back() == '\r') {
                    line.pop_back();
                }
                return true;
            }
            line.push_back(c);
        }
    }

    /// Reads exactly n bytes; returns the number actually read (< n only at
    /// end of stream).
    std::size_t read_exact(std::string& out, std::size_t n) {
        out.clear();
        // Corrupt headers can declare absurd lengths; cap the upfront
        // reservation and let the EOF path report the truncation.
        out.reserve(std::min<std::size_t>(n, std::size_t{16} << 20));
        while (out.size() < n) {
            if (pos_ == buffer_.size() && !refill()) {
                break;
            }
            const std::size_t take = std::min(n - out.size(), buffer_.size() - pos_);
            out.append(buffer_.data() + pos_, take);
            pos_ += take;
            offset_ += take;
        }
        return out.size();
    }

  private:
    bool refill() {
        buffer_.clear();
        pos_ = 0;
        if (!gzip_) {
            char chunk[kIoChunk];
            in_.read(chunk, sizeof(chunk));
            const auto got = static_cast<std::size_t>(in_.gcount());
            if (got == 0) {
                return false;
            }
            buffer_.assign(chunk, got);
            return true;
        }
        char decoded[kIoChunk];
        while (true) {
            if (strm_.avail_in == 0) {
                in_.read(compressed_, sizeof(compressed_));
                const auto got = static_cast<std::size_t>(in_.gcount());
                strm_.next_in = reinterpret_cast<Bytef*>(compressed_);
                strm_.avail_in = static_cast<uInt>(got);
                if (got == 0) {
                    // End of compressed input. Mid-member truncation surfaces
                    // to the caller as a short read; the WARC layer reports
                    // it as a truncated record.
                    return false;
                }
            }
            if (member_done_) {
                // Bytes remain after a finished member: the next
                // concatenated gzip member starts here.
                if (inflateReset(&strm_) != Z_OK) {
                    throw std::runtime_error("zlib reset failed between gzip members");
                }
                member_done_ = false;
            }
            strm_.next_out = reinterpret_cast<Bytef*>(decoded);
            strm_.avail_out = sizeof(decoded);
            const int rc = inflate(&strm_, Z_NO_FLUSH);
            const std::size_t produced = sizeof(decoded) - strm_.avail_out;
            if (rc == Z_STREAM_END) {
                member_done_ = true;
            } else if (rc != Z_OK && rc != Z_BUF_ERROR) {
                throw std::runtime_error(std::string("gzip decoding failed: ") +
                                         (strm_.msg != nullptr ? strm_.msg : zError(rc)));
            }
            if (produced > 0) {
                buffer_.assign(decoded, produced);
                return true;
            }
        }
    }

    std::istream& in_;
    bool gzip_ = false;
    bool inflate_ready_ = false;
    bool member_done_ = false;
    z_stream strm_{};
    char compressed_[kIoChunk]{};
    std::string buffer_;
    std::size_t pos_ = 0;
    std::uint64_t offset_ = 0;
};

std::string lower_ascii(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool is_blank(const std::string& line) {
    return line.find_first_not_of(" \t") == std::string::npos;
}

}  // namespace

WarcError::WarcError(std::uint64_t byte_offset, const std::string& message)
    : std::runtime_error("byte offset " + std::to_string(byte_offset) + ": " + message),
      byte_offset_(byte_offset) {}

struct WetReader::Impl {
    explicit Impl(std::istream& in) : reader(in) {}

    DecodingReader reader;
    std::vector<std::string> warnings;
    bool done = false;
};

WetReader::WetReader(std::istream& in) : impl_(std::make_unique<Impl>(in)) {}

WetReader::~WetReader() = default;

const std::vector<std::string>& WetReader::warnings() const {
    return impl_->warnings;
}

std::optional<WetRecord> WetReader::next() {
    auto& reader = impl_->reader;
    std::string line;
    while (!impl_->done) {
        // Version line; blank lines between records are tolerated.
        std::uint64_t record_offset = reader.offset();
        if (!reader.read_line(line)) {
            impl_->done = true;
            return std::nullopt;
        }
        if (is_blank(line)) {
            continue;
        }
        if (line.rfind("WARC/", 0) != 0) {
            throw WarcError(record_offset, "expected WARC version line, got '" + line + "'");
        }

        std::map<std::string, std::string> headers;
        while (true) {
            const std::uint64_t header_offset = reader.offset();
            if (!reader.read_line(line)) {
                impl_->warnings.push_back("truncated record header at end of archive; "
                                          "record skipped");
                impl_->done = true;
                return std::nullopt;
            }
            if (line.empty()) {
                break;
            }
            const auto colon = line.find(':');
            if (colon == std::string::npos) {
                throw WarcError(header_offset, "malformed WARC header line '" + line + "'");
            }
            std::string key = lower_ascii(line.substr(0, colon));
            std::string value = line.substr(colon + 1);
            const auto start = value.find_first_not_of(' ');
            value = start == std::string::npos ? std::string() : value.substr(start);
            headers[std::move(key)] = std::move(value);
        }

        const auto length_it = headers.find("content-length");
        if (length_it == headers.end()) {
            throw WarcError(record_offset, "record missing Content-Length header");
        }
        std::size_t declared = 0;
        try {
            declared = std::stoull(length_it->second);
        } catch (const std::exception&) {
            throw WarcError(record_offset,
                            "invalid Content-Length '" + length_it->second + "'");
        }

        std::string payload;
        const std::size_t got = reader.read_exact(payload, declared);
        if (got < declared) {
            impl_->warnings.push_back(
                "truncated final record (expected " + std::to_string(declared) + " bytes, got " +
                std::to_string(got) + "); record skipped");
            impl_->done = true;
            return std::nullopt;
        }
        // Record separator: two empty lines. Consume what is present.
        for (int i = 0; i < 2; ++i) {
            if (!reader.read_line(line)) {
                break;
            }
            if (!line.empty()) {
                throw WarcError(reader.offset(),
                                "expected blank record separator, got '" + line + "'");
            }
        }

        const auto type_it = headers.find("warc-type");
        if (type_it == headers.end() || type_it->second != "conversion") {
            continue;  // warcinfo, metadata, ... are not text records
        }
        WetRecord record;
        const auto uri_it = headers.find("warc-target-uri");
        if (uri_it != headers.end() && !uri_it->second.empty()) {
            record.record_id = uri_it->second;
        } else {
            const auto id_it = headers.find("warc-record-id");
            record.record_id = id_it != headers.end() ? id_it->second : std::string();
        }
        record.text = utf8_sanitize(payload);
        return record;
    }
    return std::nullopt;
}

std::string utf8_sanitize(std::string_view bytes) {
    std::string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    while (i < bytes.size()) {
        const auto b0 = static_cast<unsigned char>(bytes[i]);
        std::size_t len;
        if (b0 < 0x80) {
            len = 1;
        } else if ((b0 & 0xE0) == 0xC0 && b0 >= 0xC2) {
            len = 2;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
        } else if ((b0 & 0xF8) == 0xF0 && b0 <= 0xF4) {
            len = 4;
        } else {
            out.append(kReplacementChar);
            ++i;
            continue;
        }
        bool ok = i + len <= bytes.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            ok = (static_cast<unsigned char>(bytes[i + k]) & 0xC0) == 0x80;
        }
        if (ok) {
            out.append(bytes.substr(i, len));
            i += len;
        } else {
            out.append(kReplacementChar);
            ++i;
        }
    }
    return out;
}

YesNoCounts count_yes_no(std::string_view text, std::optional<std::uint64_t> truncate_chars) {
    YesNoCounts counts;
    const std::uint64_t limit =
        truncate_chars.value_or(std::numeric_limits<std::uint64_t>::max());

    // Tokens are maximal runs of letters. ASCII letters are compared against
    // yes/no; non-ASCII code points also extend a token (so "no" embedded in
    // a longer non-ASCII word does not count) but can never match.
    std::string token;
    bool token_pure_ascii = true;
    const auto flush_token = [&] {
        if (!token.empty() && token_pure_ascii) {
            const std::string lowered = lower_ascii(token);
            if (lowered == "yes") {
                ++counts.yes_count;
            } else if (lowered == "no") {
                ++counts.no_count;
            }
        }
        token.clear();
        token_pure_ascii = true;
    };
    const auto extends_token = [](unsigned char b) {
        return b >= 0x80 || std::isalpha(b) != 0;
    };

    std::size_t i = 0;
    while (i < text.size() && counts.chars_scanned < limit) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        std::size_t cp_len = 1;
        if ((b0 & 0xE0) == 0xC0) {
            cp_len = 2;
        } else if ((b0 & 0xF0) == 0xE0) {
            cp_len = 3;
        } else if ((b0 & 0xF8) == 0xF0) {
            cp_len = 4;
        }
        cp_len = std::min(cp_len, text.size() - i);
        ++counts.chars_scanned;

        if (b0 < 0x80) {
            if (std::isalpha(b0) != 0) {
                token.push_back(static_cast<char>(b0));
            } else {
                flush_token();
            }
        } else {
            token.append(text.substr(i, cp_len));
            token_pure_ascii = false;
        }
        i += cp_len;
    }
    // A token cut open by the truncation boundary is incomplete and does not
    // count ("yesterday" clipped at 3 characters must not become a "yes");
    // this keeps counts monotone in the truncation length.
    if (i < text.size() && extends_token(static_cast<unsigned char>(text[i]))) {
        token.clear();
    }
    flush_token();
    return counts;
}

CrawlAggregate aggregate_crawl(const std::vector<CrawlPageStats>& pages, double alpha) {
    if (pages.empty()) {
        throw std::invalid_argument("empty corpus");
    }
    CrawlAggregate agg;
    agg.pages = pages.size();
    std::uint64_t neither = 0;
    double conditional_sum = 0.0;
    std::uint64_t conditional_pages = 0;
    for (const auto& page : pages) {
        agg.total_yes += page.yes_count;
        agg.total_no += page.no_count;
        const std::uint64_t page_total = page.yes_count + page.no_count;
        if (page_total == 0) {
            ++neither;
        } else {
            conditional_sum += static_cast<double>(page.yes_count) /
                               static_cast<double>(page_total);
            ++conditional_pages;
        }
    }
    agg.neither_fraction = static_cast<double>(neither) / static_cast<double>(agg.pages);
    const std::uint64_t pooled = agg.total_yes + agg.total_no;
    if (pooled > 0) {
        agg.corpus_yes_fraction =
            static_cast<double>(agg.total_yes) / static_cast<double>(pooled);
        agg.uniformity_test = stats::chi_square_uniform(agg.total_yes, agg.total_no, alpha);
    }
    if (conditional_pages > 0) {
        agg.mean_page_conditional = conditional_sum / static_cast<double>(conditional_pages);
    }
    return agg;
}

}  // namespace binaudit::crawl
