#pragma once

#include "lsfkit/lsf.hpp"

#include <optional>
#include <string>

namespace lsfkit::cli {

struct BuildReport {
    std::string mode;
    std::string model;
    uint64_t seed = 0;
    uint32_t classes = 0;
    double trainSeconds = 0;
    double constructionUsPerKey = 0;
    SpaceLedger ledger;
    double h0 = 0;
    double ece = 0;
    double accuracy = 0;
    std::optional<double> holdoutAccuracy;
    uint32_t maxFilterLength = 0;
    uint32_t maxCorrectionLength = 0;
};

/// Flat JSON object; field meanings are listed in docs/REPORT.md.
std::string toJson(const BuildReport &r);
std::string toText(const BuildReport &r);

struct QueryReport {
    uint64_t rows = 0;
    uint64_t mismatches = 0;
    bool verified = false;
    uint64_t benchKeys = 0;
    uint32_t benchRuns = 0;
    uint32_t threads = 1;
    double usPerKey = 0;
    double fastPathRate = 0;
};

std::string toJson(const QueryReport &r);
std::string toText(const QueryReport &r);

} // namespace lsfkit::cli
