#include "lsfkit/coding.hpp"

#include "lsfkit/error.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <queue>

namespace lsfkit {

Distribution clampNormalize(std::span<const double> raw) {
    double total = 0;
    for (double x : raw) {
        if (!(x >= 0) || !std::isfinite(x))
            throw Error(ErrorCode::InvalidArgument, "probabilities must be finite and nonnegative");
        total += x;
    }
    if (!(total > 0))
        throw Error(ErrorCode::AllZero, "distribution has no positive entry");

    std::vector<double> p(raw.begin(), raw.end());
    for (double &x : p)
        x /= total;
    // Pin entries below the floor at exactly the floor and rescale the rest
    // into the remaining mass; rescaling can push further entries under the
    // floor, so repeat until stable (at most |V| rounds).
    std::vector<char> pinned(p.size(), 0);
    for (size_t round = 0; round <= p.size(); ++round) {
        size_t pinnedCount = 0;
        double freeMass = 0;
        bool changed = false;
        for (size_t v = 0; v < p.size(); ++v) {
            if (!pinned[v] && p[v] < kProbabilityFloor) {
                pinned[v] = 1;
                changed = true;
            }
            if (pinned[v])
                ++pinnedCount;
            else
                freeMass += p[v];
        }
        if (!changed)
            break;
        const double target = 1.0 - static_cast<double>(pinnedCount) * kProbabilityFloor;
        for (size_t v = 0; v < p.size(); ++v)
            p[v] = pinned[v] ? kProbabilityFloor : p[v] * (target / freeMass);
    }
    return Distribution(std::move(p));
}

uint32_t shannonLength(double p, size_t alphabetSize) noexcept {
    int e = 0;
    std::frexp(p, &e); // p = f * 2^e with f in [0.5, 1)
    int l = 1 - e;
    if (alphabetSize > 1)
        l = std::max(l, 1);
    l = std::clamp(l, 0, static_cast<int>(kMaxShannonLength));
    return static_cast<uint32_t>(l);
}

size_t CodeBook::leafOf(uint32_t value) const noexcept {
    for (size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].value == value)
            return i;
    return entries_.size();
}

double CodeBook::expectedLength() const noexcept {
    double sum = 0;
    for (const auto &e : entries_)
        sum += e.prob * e.length;
    return sum;
}

double CodeBook::kraftSum() const noexcept {
    double sum = 0;
    for (const auto &e : entries_)
        sum += std::ldexp(1.0, -static_cast<int>(e.length));
    return sum;
}

bool CodeBook::prefixFree() const noexcept {
    for (size_t i = 0; i < entries_.size(); ++i) {
        for (size_t j = 0; j < entries_.size(); ++j) {
            if (i == j)
                continue;
            const CodeEntry &a = entries_[i];
            const CodeEntry &b = entries_[j];
            if (a.length > b.length)
                continue;
            if (a.length == 0 || (b.codeword >> (b.length - a.length)) == a.codeword)
                return false;
        }
    }
    return true;
}

CodeBook shannonAssign(const Distribution &dist) {
    const size_t n = dist.size();
    // Bucket sort by length; iterating values in index order keeps ties stable.
    std::vector<std::vector<uint32_t>> buckets(kMaxShannonLength + 1);
    for (uint32_t v = 0; v < n; ++v)
        buckets[shannonLength(dist[v], n)].push_back(v);

    std::vector<CodeEntry> entries;
    entries.reserve(n);
    // Cumulative Kraft sum as a fixed-point fraction with 32 fractional bits.
    uint64_t acc = 0;
    for (uint32_t len = 0; len <= kMaxShannonLength; ++len) {
        for (uint32_t v : buckets[len]) {
            const unsigned shift = kMaxShannonLength - len;
            entries.push_back({v, dist[v], len, acc >> shift});
            acc += uint64_t{1} << shift;
        }
    }
    assert(acc <= (uint64_t{1} << kMaxShannonLength));
    return CodeBook(std::move(entries));
}

CodeBook huffmanAssign(const Distribution &dist) {
    const size_t n = dist.size();
    if (n == 0)
        return {};
    if (n == 1)
        return CodeBook({{0, dist[0], 0, 0}});

    struct Node {
        double weight;
        uint32_t minValue;
        int left = -1;
        int right = -1;
    };
    std::vector<Node> nodes;
    nodes.reserve(2 * n);
    for (uint32_t v = 0; v < n; ++v)
        nodes.push_back({dist[v], v});
    auto worse = [&](int a, int b) {
        if (nodes[a].weight != nodes[b].weight)
            return nodes[a].weight > nodes[b].weight;
        return nodes[a].minValue > nodes[b].minValue;
    };
    std::priority_queue<int, std::vector<int>, decltype(worse)> heap(worse);
    for (int i = 0; i < static_cast<int>(n); ++i)
        heap.push(i);
    while (heap.size() > 1) {
        int a = heap.top();
        heap.pop();
        int b = heap.top();
        heap.pop();
        nodes.push_back({nodes[a].weight + nodes[b].weight,
                         std::min(nodes[a].minValue, nodes[b].minValue), a, b});
        heap.push(static_cast<int>(nodes.size() - 1));
    }
    std::vector<uint32_t> lengths(n, 0);
    std::vector<std::pair<int, uint32_t>> stack{{heap.top(), 0}};
    while (!stack.empty()) {
        auto [node, depth] = stack.back();
        stack.pop_back();
        if (nodes[node].left < 0) {
            lengths[nodes[node].minValue] = depth;
            continue;
        }
        stack.push_back({nodes[node].left, depth + 1});
        stack.push_back({nodes[node].right, depth + 1});
    }

    std::vector<uint32_t> order(n);
    for (uint32_t v = 0; v < n; ++v)
        order[v] = v;
    std::stable_sort(order.begin(), order.end(),
                     [&](uint32_t a, uint32_t b) { return lengths[a] < lengths[b]; });
    std::vector<CodeEntry> entries;
    entries.reserve(n);
    uint64_t code = 0;
    uint32_t prevLen = lengths[order[0]];
    for (size_t i = 0; i < n; ++i) {
        const uint32_t v = order[i];
        if (lengths[v] > 64)
            throw Error(ErrorCode::InvalidArgument, "Huffman code longer than 64 bits");
        if (i > 0) {
            code = (code + 1) << (lengths[v] - prevLen);
        }
        prevLen = lengths[v];
        entries.push_back({v, dist[v], lengths[v], code});
    }
    return CodeBook(std::move(entries));
}

Split descend(const TreeCursor &cursor, const CodeBook &book) {
    if (book.size() == 0 || cursor.isLeaf(book))
        throw Error(ErrorCode::NotInner, "cannot descend from a leaf");
    Split out;
    size_t s = cursor.first;
    double leftMass = 0;
    while (s <= cursor.last && !book.bitAt(s, cursor.depth)) {
        leftMass += book[s].prob;
        ++s;
    }
    out.split = s;
    out.hasLeft = s > cursor.first;
    out.hasRight = s <= cursor.last;
    out.pLeft = leftMass / cursor.mass;
    out.pRight = 1.0 - out.pLeft;
    if (!out.hasRight) {
        out.pLeft = 1.0;
        out.pRight = 0.0;
    } else if (!out.hasLeft) {
        out.pLeft = 0.0;
        out.pRight = 1.0;
    }
    out.left = {cursor.depth + 1, cursor.first, s == 0 ? 0 : s - 1, leftMass};
    out.right = {cursor.depth + 1, s, cursor.last, cursor.mass - leftMass};
    return out;
}

double spaceCost(double p, double r) noexcept { return p * r + p + (1.0 - p) * std::exp2(-r); }

uint32_t optimalBitLength(double p) noexcept {
    // spaceCost is convex in r, so the integer optimum neighbours the real one.
    const double real = std::min(optimalRealBitLength(p), 64.0);
    const auto lo = static_cast<uint32_t>(std::floor(real));
    const uint32_t hi = std::min<uint32_t>(lo + 1, 64);
    return spaceCost(p, hi) < spaceCost(p, lo) * (1 - 1e-12) ? hi : lo;
}

double optimalRealBitLength(double p) noexcept {
    if (p <= 0)
        return 64.0;
    const double r = std::log2((1.0 - p) * std::numbers::ln2 / p);
    return std::max(r, 0.0);
}

double binaryEntropy(double p) noexcept {
    if (p <= 0 || p >= 1)
        return 0;
    return p * std::log2(1 / p) + (1 - p) * std::log2(1 / (1 - p));
}

double entropy(std::span<const double> probs) noexcept {
    double h = 0;
    for (double p : probs)
        if (p > 0)
            h += p * std::log2(1 / p);
    return h;
}

} // namespace lsfkit
