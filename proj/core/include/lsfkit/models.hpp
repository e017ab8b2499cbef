#pragma once

#include "lsfkit/coding.hpp"
#include "lsfkit/detail/binary_io.hpp"

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace lsfkit {

/// Dense row-major matrix of preprocessed features.
struct FeatureMatrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> values;

    FeatureMatrix() = default;
    FeatureMatrix(size_t r, size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

    [[nodiscard]] std::span<const double> row(size_t i) const noexcept { return {values.data() + i * cols, cols}; }
    [[nodiscard]] std::span<double> row(size_t i) noexcept { return {values.data() + i * cols, cols}; }
    double &at(size_t i, size_t j) noexcept { return values[i * cols + j]; }
    [[nodiscard]] double at(size_t i, size_t j) const noexcept { return values[i * cols + j]; }
};

enum class ModelKind : uint8_t { Gnb = 1, Lr = 2, Freq = 3 };

/// Gaussian naive Bayes; means and variances are classes x dim, row-major.
struct GnbModel {
    uint32_t dim = 0;
    uint32_t classes = 0;
    std::vector<double> priors;
    std::vector<double> means;
    std::vector<double> variances;
};

/// Softmax regression; weights are dim x classes, row-major.
struct LrModel {
    uint32_t dim = 0;
    uint32_t classes = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    static LrModel zeros(uint32_t dim, uint32_t classes) {
        return {dim, classes, std::vector<double>(size_t{dim} * classes, 0.0), std::vector<double>(classes, 0.0)};
    }
};

/// Key-independent value frequencies, kept as exact counts.
struct FreqModel {
    std::vector<uint64_t> counts;
};

class ProbabilityModel {
public:
    ProbabilityModel() = default;
    ProbabilityModel(GnbModel m) : model_(std::move(m)) {}
    ProbabilityModel(LrModel m) : model_(std::move(m)) {}
    ProbabilityModel(FreqModel m) : model_(std::move(m)) {}

    [[nodiscard]] ModelKind kind() const noexcept;
    /// Expected feature dimension; 0 for the frequency model, which ignores x.
    [[nodiscard]] uint32_t dim() const noexcept;
    [[nodiscard]] uint32_t classes() const noexcept;

    /// Normalized probabilities before flooring, written to `out` (size classes()).
    void predictInto(std::span<const double> x, std::span<double> out) const;
    [[nodiscard]] Distribution predict(std::span<const double> x) const;

    [[nodiscard]] size_t paramCount() const noexcept;
    /// Bits of the serialized model: 72-bit header plus the parameters.
    [[nodiscard]] uint64_t encodedBits() const noexcept;

    /// Rounds every parameter through IEEE binary16, the storage precision.
    [[nodiscard]] ProbabilityModel quantized() const;

    [[nodiscard]] const GnbModel *gnb() const noexcept { return std::get_if<GnbModel>(&model_); }
    [[nodiscard]] const LrModel *lr() const noexcept { return std::get_if<LrModel>(&model_); }
    [[nodiscard]] const FreqModel *freq() const noexcept { return std::get_if<FreqModel>(&model_); }

    void serializeTo(detail::ByteWriter &out) const;
    static ProbabilityModel deserializeFrom(detail::ByteReader &in);

private:
    std::variant<FreqModel, GnbModel, LrModel> model_;
};

struct GnbOptions {
    double relativeVarFloor = 1e-6;
    /// Classes without samples get a zero prior instead of raising EmptyClass.
    bool allowEmptyClasses = false;
};

GnbModel gnbFit(const FeatureMatrix &x, std::span<const uint32_t> y, uint32_t classes,
                const GnbOptions &opt = {});

struct LrHyper {
    double learningRate = 0.05;
    size_t batchSize = 256;
    uint32_t maxEpochs = 100;
    uint32_t patience = 3;
    double minImprovement = 0.01;
    double validationFraction = 0.1;
    uint64_t seed = 0x1a2b3c4d;
};

LrModel lrFit(const FeatureMatrix &x, std::span<const uint32_t> y, uint32_t classes, const LrHyper &hyper = {});

/// Mean surprisal in bits of `model` over the rows listed in `rows` (all rows
/// if empty). If `grad` is non-null it receives the analytic gradient.
double lrLoss(const LrModel &model, const FeatureMatrix &x, std::span<const uint32_t> y,
              LrModel *grad = nullptr, std::span<const size_t> rows = {});

FreqModel freqFit(std::span<const uint32_t> y, uint32_t classes);

/// Total bits: sum over rows of log2(1 / mu(y)), mu floored and renormalized.
double surprisal(const ProbabilityModel &model, const FeatureMatrix &x, std::span<const uint32_t> y);

/// Expected calibration error with equal-count bins sorted by confidence.
double ece(const ProbabilityModel &model, const FeatureMatrix &x, std::span<const uint32_t> y,
           size_t bins = 50);

/// ECE from precomputed (confidence, correct) pairs.
double eceFromConfidences(std::span<const double> confidence, std::span<const char> correct, size_t bins = 50);

double accuracy(const ProbabilityModel &model, const FeatureMatrix &x, std::span<const uint32_t> y);

} // namespace lsfkit
