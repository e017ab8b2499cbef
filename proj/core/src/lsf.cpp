#include "lsfkit/lsf.hpp"

#include "lsfkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lsfkit {

namespace {

double nodeCoin(KeyDigest d, uint32_t depth) noexcept {
    return static_cast<double>(remix(d.value, 0x300 + depth) >> 11) * 0x1p-53;
}

// Walks the implicit code tree from `start`. Nodes with a single child are
// forced and cost nothing; `decide(cursor, split)` picks the branch at every
// other node. Returns the leaf position reached.
template <class Decide>
size_t walk(const CodeBook &book, TreeCursor u, Decide &&decide) {
    while (!u.isLeaf(book)) {
        const Split sp = descend(u, book);
        bool bit;
        if (!sp.hasLeft)
            bit = true;
        else if (!sp.hasRight)
            bit = false;
        else
            bit = decide(u, sp);
        u = bit ? sp.right : sp.left;
    }
    return u.first;
}

} // namespace

double SpaceLedger::overheadRatio() const noexcept {
    if (!overheadDefined())
        return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(totalBits - modelBits) / surprisalBits;
}

// Per-key state shared by both construction passes and the query.
struct Lsf::Walker {
    const Lsf &lsf;
    KeyDigest digest;
    BitStream filter;
    uint32_t filterPos = 0;

    Walker(const Lsf &l, KeyDigest d) : lsf(l), digest(d), filter(l.filter_.queryFilterStream(d)) {}

    uint32_t length(const TreeCursor &u, double pRight) const {
        const double pLess = std::min(pRight, 1.0 - pRight);
        return filterLength(pLess, lsf.randomizedRounding_, nodeCoin(digest, u.depth));
    }

    // Reads r match bits; reads past the stored length count as mismatches.
    bool match(uint32_t r) {
        if (static_cast<uint64_t>(filterPos) + r > filter.length()) {
            filterPos += r;
            return false;
        }
        bool all = true;
        for (uint32_t i = 0; i < r; ++i)
            all &= filter.bit(filterPos + i);
        filterPos += r;
        return all;
    }
};

Distribution Lsf::distributionFor(std::span<const double> features) const {
    return model_.predict(features);
}

Lsf Lsf::build(std::span<const std::string> keys, const FeatureMatrix &features, std::span<const uint32_t> labels,
               std::vector<std::string> valueNames, const ProbabilityModel &model, Preprocessor prep,
               const LsfConfig &cfg) {
    if (model.kind() != ModelKind::Freq && features.cols != model.dim())
        throw Error(ErrorCode::ModelDimensionMismatch, "model expects " + std::to_string(model.dim()) +
                                                           " features, data has " + std::to_string(features.cols));
    if (model.classes() != valueNames.size())
        throw Error(ErrorCode::ModelDimensionMismatch, "model has " + std::to_string(model.classes()) +
                                                           " classes, value table has " +
                                                           std::to_string(valueNames.size()));
    if (model.kind() != ModelKind::Freq && features.rows != keys.size())
        throw Error(ErrorCode::DimensionMismatch, "feature rows and keys differ in length");
    Lsf shell;
    shell.mode_ = LsfMode::Learned;
    shell.model_ = model.quantized();
    shell.prep_ = std::move(prep);
    shell.valueNames_ = std::move(valueNames);
    return assemble(keys, features, labels, std::move(shell), cfg);
}

Lsf Lsf::buildCsf(std::span<const std::string> keys, std::span<const uint32_t> labels,
                  std::vector<std::string> valueNames, const LsfConfig &cfg) {
    Lsf shell;
    shell.mode_ = LsfMode::Csf;
    shell.model_ = freqFit(labels, static_cast<uint32_t>(valueNames.size()));
    shell.valueNames_ = std::move(valueNames);
    if (!shell.valueNames_.empty())
        shell.globalCode_ = huffmanAssign(shell.model_.predict({}));
    return assemble(keys, FeatureMatrix{}, labels, std::move(shell), cfg);
}

Lsf Lsf::assemble(std::span<const std::string> keys, const FeatureMatrix &features, std::span<const uint32_t> labels,
                  Lsf shell, const LsfConfig &cfg) {
    if (keys.size() != labels.size())
        throw Error(ErrorCode::DimensionMismatch, "keys and labels differ in length");
    Lsf lsf = std::move(shell);
    lsf.seed_ = cfg.seed;
    lsf.n_ = keys.size();
    lsf.randomizedRounding_ = cfg.randomizedRounding;
    const uint32_t classes = lsf.classes();
    for (uint32_t v : labels)
        if (v >= classes)
            throw Error(ErrorCode::InvalidArgument, "label index out of range");
    if (classes == 0 && !keys.empty())
        throw Error(ErrorCode::InvalidArgument, "empty value table");

    std::vector<KeyDigest> digests(keys.size());
    for (size_t i = 0; i < keys.size(); ++i)
        digests[i] = digest(keys[i], cfg.seed);
    {
        std::vector<size_t> order(keys.size());
        std::iota(order.begin(), order.end(), size_t{0});
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return digests[a] < digests[b]; });
        for (size_t t = 1; t < order.size(); ++t) {
            if (digests[order[t]] != digests[order[t - 1]])
                continue;
            if (keys[order[t]] == keys[order[t - 1]])
                throw Error(ErrorCode::DuplicateKey, "key '" + keys[order[t]] + "' occurs twice");
            throw Error(ErrorCode::DuplicateDigest, "keys '" + keys[order[t]] + "' and '" + keys[order[t - 1]] +
                                                        "' share a 64-bit digest");
        }
    }

    const bool csf = lsf.mode_ == LsfMode::Csf;
    auto distributionOf = [&](size_t i) {
        return csf ? lsf.model_.predict({}) : lsf.distributionFor(features.row(i));
    };
    auto bookFor = [&](const Distribution &mu) { return csf ? lsf.globalCode_ : shannonAssign(mu); };

    BuildConfig fcfg = cfg.ribbon;
    fcfg.seed = filterSeed(cfg.seed);
    BuildConfig ccfg = cfg.ribbon;
    ccfg.seed = correctionSeed(cfg.seed);

    // Pass 1: filter patterns, 1^r where the taken branch is the less likely one.
    std::vector<std::pair<KeyDigest, BitPattern>> patterns(keys.size());
    double surprisal = 0;
    uint32_t fMax = 0;
    for (size_t i = 0; i < keys.size(); ++i) {
        const Distribution mu = distributionOf(i);
        surprisal -= std::log2(mu[labels[i]]);
        const CodeBook book = bookFor(mu);
        const size_t target = book.leafOf(labels[i]);
        BitPattern &pattern = patterns[i].second;
        patterns[i].first = digests[i];
        walk(book, TreeCursor::root(book), [&](const TreeCursor &u, const Split &sp) {
            const bool bit = target >= sp.split;
            const double pTaken = bit ? sp.pRight : sp.pLeft;
            const bool lessProbable = pTaken < 0.5 || (pTaken == 0.5 && bit);
            const uint32_t r = filterLength(std::min(sp.pRight, 1.0 - sp.pRight), cfg.randomizedRounding,
                                            nodeCoin(digests[i], u.depth));
            if (lessProbable)
                pattern.appendOne(r);
            else
                pattern.appendAny(r);
            return bit;
        });
        fMax = std::max(fMax, static_cast<uint32_t>(pattern.size()));
    }
    lsf.fMax_ = fMax;
    lsf.surprisalBits_ = surprisal;
    lsf.filter_ = VlBurr::buildFilter(patterns, fcfg);
    patterns = {};

    // Pass 2: branch bits wherever the built filter reports a match.
    std::vector<std::pair<KeyDigest, BitString>> corrections(keys.size());
    uint32_t cMax = 0;
    for (size_t i = 0; i < keys.size(); ++i) {
        const Distribution mu = distributionOf(i);
        const CodeBook book = bookFor(mu);
        const size_t target = book.leafOf(labels[i]);
        Walker w(lsf, digests[i]);
        BitString &bits = corrections[i].second;
        corrections[i].first = digests[i];
        walk(book, TreeCursor::root(book), [&](const TreeCursor &u, const Split &sp) {
            const bool bit = target >= sp.split;
            if (w.match(w.length(u, sp.pRight)))
                bits.push(bit);
            return bit;
        });
        cMax = std::max(cMax, static_cast<uint32_t>(bits.size()));
    }
    lsf.cMax_ = cMax;
    lsf.correction_ = VlBurr::build(corrections, ccfg);
    return lsf;
}

uint32_t Lsf::query(std::string_view key, std::span<const double> features, const QueryOptions &opt,
                    QueryStats *stats) const {
    if (stats)
        ++stats->queries;
    if (valueNames_.empty())
        return 0;
    const KeyDigest d = digest(key, seed_);
    Walker w(*this, d);
    BitStream correction = correction_.queryStream(d);
    auto decide = [&](const TreeCursor &u, double pRight) {
        if (w.match(w.length(u, pRight))) {
            if (correction.position() >= correction.length())
                return false;
            return correction.next();
        }
        return pRight > 0.5;
    };

    if (mode_ == LsfMode::Csf) {
        const size_t leaf = walk(globalCode_, TreeCursor::root(globalCode_),
                                 [&](const TreeCursor &u, const Split &sp) { return decide(u, sp.pRight); });
        return globalCode_[leaf].value;
    }

    const Distribution mu = distributionFor(features);
    TreeCursor start{};
    if (!opt.forceSlowPath && mu.size() > 1) {
        const auto probs = mu.probs();
        const auto best = static_cast<size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
        const double pMax = probs[best];
        if (pMax > 0.5) {
            // The most likely value owns the lone length-1 codeword "0".
            const double pRight = 1.0 - pMax;
            const TreeCursor root{0, 0, mu.size() - 1, 1.0};
            if (!decide(root, pRight)) {
                if (stats)
                    ++stats->fastPath;
                return static_cast<uint32_t>(best);
            }
            start = {1, 1, mu.size() - 1, 1.0 - pMax};
        }
    }
    if (stats)
        ++stats->codeBooks;
    const CodeBook book = shannonAssign(mu);
    if (start.depth == 0)
        start = TreeCursor::root(book);
    const size_t leaf = walk(book, start, [&](const TreeCursor &u, const Split &sp) { return decide(u, sp.pRight); });
    return book[leaf].value;
}

} // namespace lsfkit
