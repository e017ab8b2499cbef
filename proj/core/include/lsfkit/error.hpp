#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lsfkit {

enum class ErrorCode {
    DuplicateDigest,
    DuplicateKey,
    ConstructionFailed,
    StreamExhausted,
    NotInner,
    AllZero,
    DimensionMismatch,
    EmptyClass,
    UnknownCategory,
    WeightOutOfRange,
    ModelDimensionMismatch,
    InvalidSigma,
    MissingColumn,
    ParseError,
    EmptyDataset,
    FractionSum,
    BadMagic,
    VersionMismatch,
    TruncatedInput,
    ChecksumMismatch,
    InvalidArgument,
    Io,
};

std::string_view errorName(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(errorName(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace lsfkit
