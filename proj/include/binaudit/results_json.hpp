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

#ifndef BINAUDIT_RESULTS_JSON_HPP
#define BINAUDIT_RESULTS_JSON_HPP

#include <optional>
#include <string>
#include <vector>

#include "binaudit/crawl.hpp"
#include "binaudit/experiment.hpp"

namespace binaudit::experiment {

/// Machine-readable results container written by the CLI commands and
/// consumed by `report`. Any combination of members may be present.
struct ResultsDocument {
    std::vector<ExperimentResult> experiments;
    std::optional<SweepResult> sweep;
    std::optional<RecencyComparison> comparison;
    std::optional<crawl::CrawlAggregate> crawl_aggregate;
    std::vector<crawl::CrawlPageStats> crawl_pages;
};

std::string results_document_to_json_text(const ResultsDocument& document);
ResultsDocument results_document_from_json_text(const std::string& text);

std::string render_document(const ResultsDocument& document, ReportFormat format);

}  // namespace binaudit::experiment

#endif  // BINAUDIT_RESULTS_JSON_HPP
