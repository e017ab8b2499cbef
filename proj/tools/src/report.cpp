#include "lsfkit_cli/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>

namespace lsfkit::cli {

namespace {

std::string line(const char *name, double value, const char *unit = "") {
    char buf[128];
    std::snprintf(buf, sizeof buf, "  %-28s %.6f%s\n", name, value, unit);
    return buf;
}

} // namespace

std::string toJson(const BuildReport &r) {
    const SpaceLedger &l = r.ledger;
    nlohmann::json j;
    j["command"] = "build";
    j["mode"] = r.mode;
    j["model"] = r.model;
    j["seed"] = r.seed;
    j["keys"] = l.keys;
    j["classes"] = r.classes;
    j["train_seconds"] = r.trainSeconds;
    j["construction_us_per_key"] = r.constructionUsPerKey;
    j["total_bits"] = l.totalBits;
    j["bits_per_key"] = l.perKey(static_cast<double>(l.totalBits));
    j["model_bits"] = l.modelBits;
    j["model_bits_per_key"] = l.perKey(static_cast<double>(l.modelBits));
    j["filter_bits_per_key"] = l.perKey(static_cast<double>(l.filterPayloadBits));
    j["correction_bits_per_key"] = l.perKey(static_cast<double>(l.correctionPayloadBits));
    j["metadata_bits_per_key"] = l.perKey(static_cast<double>(l.metadataBits));
    j["payload_bits_per_key"] = l.perKey(static_cast<double>(l.payloadBits()));
    j["surprisal_bits_per_key"] = l.perKey(l.surprisalBits);
    j["sigma_bits_per_key"] = l.perKey(l.sigmaBits);
    j["overhead_defined"] = l.overheadDefined();
    if (l.overheadDefined())
        j["overhead_ratio"] = l.overheadRatio();
    else
        j["overhead_ratio"] = nullptr;
    j["h0_bits_per_key"] = r.h0;
    j["ece"] = r.ece;
    j["accuracy"] = r.accuracy;
    if (r.holdoutAccuracy)
        j["holdout_accuracy"] = *r.holdoutAccuracy;
    j["max_filter_length"] = r.maxFilterLength;
    j["max_correction_length"] = r.maxCorrectionLength;
    return j.dump() + "\n";
}

std::string toText(const BuildReport &r) {
    const SpaceLedger &l = r.ledger;
    std::string s = "built " + r.mode + " structure (" + r.model + " model) over " + std::to_string(l.keys) +
                    " keys, " + std::to_string(r.classes) + " values\n";
    s += line("train time", r.trainSeconds, " s");
    s += line("construction", r.constructionUsPerKey, " us/key");
    s += line("total", l.perKey(static_cast<double>(l.totalBits)), " bits/key");
    s += line("  model", l.perKey(static_cast<double>(l.modelBits)), " bits/key");
    s += line("  filter", l.perKey(static_cast<double>(l.filterPayloadBits)), " bits/key");
    s += line("  correction", l.perKey(static_cast<double>(l.correctionPayloadBits)), " bits/key");
    s += line("  metadata", l.perKey(static_cast<double>(l.metadataBits)), " bits/key");
    s += line("S(M,f)", l.perKey(l.surprisalBits), " bits/key");
    s += line("Sigma", l.perKey(l.sigmaBits), " bits/key");
    s += line("H0", r.h0, " bits/key");
    if (l.overheadDefined())
        s += line("overhead ratio", l.overheadRatio());
    else
        s += "  overhead ratio               undefined (zero surprisal)\n";
    s += line("ECE", r.ece);
    s += line("accuracy", r.accuracy);
    if (r.holdoutAccuracy)
        s += line("hold-out accuracy", *r.holdoutAccuracy);
    return s;
}

std::string toJson(const QueryReport &r) {
    nlohmann::json j;
    j["command"] = "query";
    j["rows"] = r.rows;
    if (r.verified)
        j["mismatches"] = r.mismatches;
    if (r.benchRuns) {
        j["bench_keys"] = r.benchKeys;
        j["bench_runs"] = r.benchRuns;
        j["threads"] = r.threads;
        j["query_us_per_key"] = r.usPerKey;
        j["fast_path_rate"] = r.fastPathRate;
    }
    return j.dump() + "\n";
}

std::string toText(const QueryReport &r) {
    std::string s;
    if (r.verified)
        s += "verified " + std::to_string(r.rows) + " rows, " + std::to_string(r.mismatches) + " mismatches\n";
    if (r.benchRuns) {
        s += "bench: " + std::to_string(r.benchKeys) + " keys x " + std::to_string(r.benchRuns) + " runs on " +
             std::to_string(r.threads) + " thread(s)\n";
        s += line("query", r.usPerKey, " us/key");
        s += line("fast path rate", r.fastPathRate);
    }
    return s;
}

} // namespace lsfkit::cli
