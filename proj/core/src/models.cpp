#include "lsfkit/models.hpp"

#include "lsfkit/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace lsfkit {

namespace {

constexpr double kHalfMax = 65504.0;
constexpr double kHalfMinPositive = 0x1p-24;

double toHalf(double v) {
    v = std::clamp(v, -kHalfMax, kHalfMax);
    return static_cast<double>(static_cast<float>(Eigen::half(static_cast<float>(v))));
}

uint16_t halfBits(double v) { return Eigen::numext::bit_cast<uint16_t>(Eigen::half(static_cast<float>(v))); }

double fromHalfBits(uint16_t bits) {
    return static_cast<double>(static_cast<float>(Eigen::numext::bit_cast<Eigen::half>(bits)));
}

// Positive parameters must stay positive after rounding so log-space
// evaluation never sees log(0).
double toHalfPositive(double v) { return std::max(toHalf(v), kHalfMinPositive); }

void softmaxInPlace(std::span<double> z) {
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0;
    for (double &v : z) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double &v : z)
        v /= sum;
}

void checkLabels(std::span<const uint32_t> y, uint32_t classes) {
    for (uint32_t v : y)
        if (v >= classes)
            throw Error(ErrorCode::InvalidArgument, "label out of range");
}

} // namespace

ModelKind ProbabilityModel::kind() const noexcept {
    if (gnb())
        return ModelKind::Gnb;
    if (lr())
        return ModelKind::Lr;
    return ModelKind::Freq;
}

uint32_t ProbabilityModel::dim() const noexcept {
    if (const auto *g = gnb())
        return g->dim;
    if (const auto *l = lr())
        return l->dim;
    return 0;
}

uint32_t ProbabilityModel::classes() const noexcept {
    if (const auto *g = gnb())
        return g->classes;
    if (const auto *l = lr())
        return l->classes;
    return static_cast<uint32_t>(freq()->counts.size());
}

void ProbabilityModel::predictInto(std::span<const double> x, std::span<double> out) const {
    if (kind() != ModelKind::Freq && x.size() != dim())
        throw Error(ErrorCode::DimensionMismatch,
                    "feature vector has " + std::to_string(x.size()) + " entries, model expects " +
                        std::to_string(dim()));
    if (const auto *g = gnb()) {
        for (uint32_t c = 0; c < g->classes; ++c) {
            double logp = g->priors[c] > 0 ? std::log(g->priors[c]) : -std::numeric_limits<double>::infinity();
            const double *mu = &g->means[size_t{c} * g->dim];
            const double *var = &g->variances[size_t{c} * g->dim];
            for (uint32_t j = 0; j < g->dim; ++j) {
                const double d = x[j] - mu[j];
                logp -= 0.5 * std::log(2 * std::numbers::pi * var[j]) + d * d / (2 * var[j]);
            }
            out[c] = logp;
        }
        softmaxInPlace(out.first(g->classes));
    } else if (const auto *l = lr()) {
        for (uint32_t c = 0; c < l->classes; ++c)
            out[c] = l->bias[c];
        for (uint32_t j = 0; j < l->dim; ++j) {
            const double xj = x[j];
            const double *wrow = &l->weights[size_t{j} * l->classes];
            for (uint32_t c = 0; c < l->classes; ++c)
                out[c] += xj * wrow[c];
        }
        softmaxInPlace(out.first(l->classes));
    } else {
        const auto &counts = freq()->counts;
        const uint64_t total = std::accumulate(counts.begin(), counts.end(), uint64_t{0});
        for (size_t v = 0; v < counts.size(); ++v)
            out[v] = total == 0 ? 1.0 / static_cast<double>(counts.size())
                                : static_cast<double>(counts[v]) / static_cast<double>(total);
    }
}

Distribution ProbabilityModel::predict(std::span<const double> x) const {
    std::vector<double> p(classes());
    predictInto(x, p);
    return clampNormalize(p);
}

size_t ProbabilityModel::paramCount() const noexcept {
    if (const auto *g = gnb())
        return g->priors.size() + g->means.size() + g->variances.size();
    if (const auto *l = lr())
        return l->weights.size() + l->bias.size();
    return freq()->counts.size();
}

uint64_t ProbabilityModel::encodedBits() const noexcept {
    const uint64_t bitsPerParam = kind() == ModelKind::Freq ? 64 : 16;
    return 72 + bitsPerParam * paramCount();
}

ProbabilityModel ProbabilityModel::quantized() const {
    if (const auto *g = gnb()) {
        GnbModel q = *g;
        for (double &v : q.priors)
            v = v > 0 ? toHalfPositive(v) : 0.0;
        for (double &v : q.means)
            v = toHalf(v);
        for (double &v : q.variances)
            v = toHalfPositive(v);
        return q;
    }
    if (const auto *l = lr()) {
        LrModel q = *l;
        for (double &v : q.weights)
            v = toHalf(v);
        for (double &v : q.bias)
            v = toHalf(v);
        return q;
    }
    return *this;
}

void ProbabilityModel::serializeTo(detail::ByteWriter &out) const {
    out.u8(static_cast<uint8_t>(kind()));
    out.u32(dim());
    out.u32(classes());
    auto halves = [&](const std::vector<double> &vs) {
        for (double v : vs)
            out.u16(halfBits(v));
    };
    if (const auto *g = gnb()) {
        halves(g->priors);
        halves(g->means);
        halves(g->variances);
    } else if (const auto *l = lr()) {
        halves(l->weights);
        halves(l->bias);
    } else {
        for (uint64_t c : freq()->counts)
            out.u64(c);
    }
}

ProbabilityModel ProbabilityModel::deserializeFrom(detail::ByteReader &in) {
    const uint8_t kind = in.u8();
    const uint32_t dim = in.u32();
    const uint32_t classes = in.u32();
    auto halves = [&](size_t n) {
        if (n > in.remaining() / 2)
            throw Error(ErrorCode::TruncatedInput, "model parameters truncated");
        std::vector<double> vs(n);
        for (double &v : vs)
            v = fromHalfBits(in.u16());
        return vs;
    };
    switch (static_cast<ModelKind>(kind)) {
    case ModelKind::Gnb: {
        GnbModel g;
        g.dim = dim;
        g.classes = classes;
        g.priors = halves(classes);
        g.means = halves(size_t{classes} * dim);
        g.variances = halves(size_t{classes} * dim);
        return g;
    }
    case ModelKind::Lr: {
        LrModel l;
        l.dim = dim;
        l.classes = classes;
        l.weights = halves(size_t{classes} * dim);
        l.bias = halves(classes);
        return l;
    }
    case ModelKind::Freq: {
        if (classes > in.remaining() / 8)
            throw Error(ErrorCode::TruncatedInput, "model parameters truncated");
        FreqModel f;
        f.counts.resize(classes);
        for (uint64_t &c : f.counts)
            c = in.u64();
        return f;
    }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown model kind " + std::to_string(kind));
}

GnbModel gnbFit(const FeatureMatrix &x, std::span<const uint32_t> y, uint32_t classes, const GnbOptions &opt) {
    if (x.rows != y.size())
        throw Error(ErrorCode::DimensionMismatch, "feature rows and labels differ in length");
    checkLabels(y, classes);
    const size_t dim = x.cols;
    GnbModel g;
    g.dim = static_cast<uint32_t>(dim);
    g.classes = classes;
    g.priors.assign(classes, 0.0);
    g.means.assign(classes * dim, 0.0);
    g.variances.assign(classes * dim, 0.0);

    std::vector<double> globalMean(dim, 0.0);
    std::vector<double> globalVar(dim, 0.0);
    std::vector<size_t> counts(classes, 0);
    for (size_t i = 0; i < x.rows; ++i) {
        ++counts[y[i]];
        for (size_t j = 0; j < dim; ++j) {
            g.means[y[i] * dim + j] += x.at(i, j);
            globalMean[j] += x.at(i, j);
        }
    }
    for (size_t j = 0; j < dim; ++j)
        globalMean[j] /= std::max<size_t>(x.rows, 1);
    for (uint32_t c = 0; c < classes; ++c) {
        if (counts[c] == 0 && !opt.allowEmptyClasses)
            throw Error(ErrorCode::EmptyClass, "class " + std::to_string(c) + " has no samples");
        for (size_t j = 0; j < dim; ++j)
            g.means[c * dim + j] = counts[c] ? g.means[c * dim + j] / static_cast<double>(counts[c]) : globalMean[j];
    }
    for (size_t i = 0; i < x.rows; ++i) {
        for (size_t j = 0; j < dim; ++j) {
            const double d = x.at(i, j) - g.means[y[i] * dim + j];
            g.variances[y[i] * dim + j] += d * d;
            const double e = x.at(i, j) - globalMean[j];
            globalVar[j] += e * e;
        }
    }
    for (size_t j = 0; j < dim; ++j)
        globalVar[j] /= std::max<size_t>(x.rows, 1);
    for (uint32_t c = 0; c < classes; ++c) {
        for (size_t j = 0; j < dim; ++j) {
            const double floor = std::max(opt.relativeVarFloor * globalVar[j], 1e-12);
            double &v = g.variances[c * dim + j];
            v = counts[c] ? v / static_cast<double>(counts[c]) : std::max(globalVar[j], 1.0);
            v = std::max(v, floor);
        }
        g.priors[c] = x.rows ? static_cast<double>(counts[c]) / static_cast<double>(x.rows) : 1.0 / classes;
    }
    return g;
}

double lrLoss(const LrModel &model, const FeatureMatrix &x, std::span<const uint32_t> y, LrModel *grad,
              std::span<const size_t> rows) {
    const size_t n = rows.empty() ? x.rows : rows.size();
    if (grad)
        *grad = LrModel::zeros(model.dim, model.classes);
    if (n == 0)
        return 0.0;
    std::vector<double> p(model.classes);
    double loss = 0;
    for (size_t t = 0; t < n; ++t) {
        const size_t i = rows.empty() ? t : rows[t];
        const auto xi = x.row(i);
        for (uint32_t c = 0; c < model.classes; ++c)
            p[c] = model.bias[c];
        for (uint32_t j = 0; j < model.dim; ++j)
            for (uint32_t c = 0; c < model.classes; ++c)
                p[c] += xi[j] * model.weights[size_t{j} * model.classes + c];
        softmaxInPlace(p);
        loss -= std::log2(std::max(p[y[i]], std::numeric_limits<double>::min()));
        if (grad) {
            p[y[i]] -= 1.0;
            for (uint32_t c = 0; c < model.classes; ++c) {
                grad->bias[c] += p[c];
                for (uint32_t j = 0; j < model.dim; ++j)
                    grad->weights[size_t{j} * model.classes + c] += xi[j] * p[c];
            }
        }
    }
    const double scale = 1.0 / (static_cast<double>(n) * std::numbers::ln2);
    if (grad) {
        for (double &v : grad->weights)
            v *= scale;
        for (double &v : grad->bias)
            v *= scale;
    }
    return loss / static_cast<double>(n);
}

LrModel lrFit(const FeatureMatrix &x, std::span<const uint32_t> y, uint32_t classes, const LrHyper &hyper) {
    if (x.rows != y.size())
        throw Error(ErrorCode::DimensionMismatch, "feature rows and labels differ in length");
    checkLabels(y, classes);
    const auto dim = static_cast<uint32_t>(x.cols);
    LrModel model = LrModel::zeros(dim, classes);
    if (x.rows == 0 || hyper.maxEpochs == 0 || classes == 0)
        return model;

    std::mt19937_64 rng(hyper.seed);
    std::vector<size_t> order(x.rows);
    std::iota(order.begin(), order.end(), size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    const auto valCount = static_cast<size_t>(hyper.validationFraction * static_cast<double>(x.rows));
    std::vector<size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(valCount));
    std::vector<size_t> train(order.begin() + static_cast<std::ptrdiff_t>(valCount), order.end());
    std::sort(val.begin(), val.end());
    const std::vector<size_t> &monitor = val.empty() ? train : val;

    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<RowMat> w(model.weights.data(), dim, classes);
    Eigen::Map<Eigen::RowVectorXd> b(model.bias.data(), classes);
    RowMat mW = RowMat::Zero(dim, classes), vW = RowMat::Zero(dim, classes);
    Eigen::RowVectorXd mB = Eigen::RowVectorXd::Zero(classes), vB = Eigen::RowVectorXd::Zero(classes);
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    uint64_t step = 0;

    const size_t batchSize = std::max<size_t>(hyper.batchSize, 1);
    RowMat batch(batchSize, dim);
    RowMat probs(batchSize, classes);

    LrModel best = model;
    double bestLoss = lrLoss(model, x, y, nullptr, monitor);
    double reference = bestLoss;
    uint32_t stale = 0;
    for (uint32_t epoch = 0; epoch < hyper.maxEpochs; ++epoch) {
        std::shuffle(train.begin(), train.end(), rng);
        for (size_t begin = 0; begin < train.size(); begin += batchSize) {
            const size_t bs = std::min(batchSize, train.size() - begin);
            for (size_t t = 0; t < bs; ++t) {
                const auto xi = x.row(train[begin + t]);
                for (uint32_t j = 0; j < dim; ++j)
                    batch(static_cast<Eigen::Index>(t), j) = xi[j];
            }
            auto xb = batch.topRows(static_cast<Eigen::Index>(bs));
            auto pb = probs.topRows(static_cast<Eigen::Index>(bs));
            pb = (xb * w).rowwise() + b;
            for (Eigen::Index t = 0; t < pb.rows(); ++t) {
                auto r = pb.row(t);
                r.array() -= r.maxCoeff();
                r = r.array().exp().matrix();
                r /= r.sum();
                r(y[train[begin + static_cast<size_t>(t)]]) -= 1.0;
            }
            const double scale = 1.0 / (static_cast<double>(bs) * std::numbers::ln2);
            const RowMat gW = (xb.transpose() * pb) * scale;
            const Eigen::RowVectorXd gB = pb.colwise().sum() * scale;

            ++step;
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            mW = beta1 * mW + (1 - beta1) * gW;
            vW = beta2 * vW + (1 - beta2) * gW.cwiseProduct(gW);
            mB = beta1 * mB + (1 - beta1) * gB;
            vB = beta2 * vB + (1 - beta2) * gB.cwiseProduct(gB);
            w.array() -= hyper.learningRate * (mW.array() / c1) / ((vW.array() / c2).sqrt() + eps);
            b.array() -= hyper.learningRate * (mB.array() / c1) / ((vB.array() / c2).sqrt() + eps);
        }
        const double loss = lrLoss(model, x, y, nullptr, monitor);
        if (loss < bestLoss) {
            bestLoss = loss;
            best = model;
        }
        if (loss < reference * (1.0 - hyper.minImprovement)) {
            reference = loss;
            stale = 0;
        } else if (++stale >= hyper.patience) {
            break;
        }
    }
    return best;
}

FreqModel freqFit(std::span<const uint32_t> y, uint32_t classes) {
    checkLabels(y, classes);
    FreqModel f;
    f.counts.assign(classes, 0);
    for (uint32_t v : y)
        ++f.counts[v];
    return f;
}

double surprisal(const ProbabilityModel &model, const FeatureMatrix &x, std::span<const uint32_t> y) {
    double total = 0;
    for (size_t i = 0; i < y.size(); ++i) {
        const Distribution mu = model.predict(x.rows ? x.row(i) : std::span<const double>{});
        total -= std::log2(mu[y[i]]);
    }
    return total;
}

double eceFromConfidences(std::span<const double> confidence, std::span<const char> correct, size_t bins) {
    const size_t n = confidence.size();
    if (n == 0 || bins == 0)
        return 0.0;
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return confidence[a] < confidence[b]; });
    bins = std::min(bins, n);
    double ece = 0;
    for (size_t k = 0; k < bins; ++k) {
        const size_t lo = k * n / bins;
        const size_t hi = (k + 1) * n / bins;
        double conf = 0, acc = 0;
        for (size_t t = lo; t < hi; ++t) {
            conf += confidence[order[t]];
            acc += correct[order[t]] ? 1.0 : 0.0;
        }
        ece += std::abs(acc - conf) / static_cast<double>(n);
    }
    return ece;
}

double ece(const ProbabilityModel &model, const FeatureMatrix &x, std::span<const uint32_t> y, size_t bins) {
    std::vector<double> confidence(y.size());
    std::vector<char> correct(y.size());
    for (size_t i = 0; i < y.size(); ++i) {
        const Distribution mu = model.predict(x.rows ? x.row(i) : std::span<const double>{});
        const auto probs = mu.probs();
        const auto arg = static_cast<size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
        confidence[i] = probs[arg];
        correct[i] = arg == y[i];
    }
    return eceFromConfidences(confidence, correct, bins);
}

double accuracy(const ProbabilityModel &model, const FeatureMatrix &x, std::span<const uint32_t> y) {
    if (y.empty())
        return 0.0;
    std::vector<double> p(model.classes());
    size_t hits = 0;
    for (size_t i = 0; i < y.size(); ++i) {
        model.predictInto(x.rows ? x.row(i) : std::span<const double>{}, p);
        hits += static_cast<size_t>(std::max_element(p.begin(), p.end()) - p.begin()) == y[i];
    }
    return static_cast<double>(hits) / static_cast<double>(y.size());
}

} // namespace lsfkit
