#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace svmm {

/// Domain error categories. The CLI prints `error_name(code)` on stderr.
enum class Errc {
    FellerViolation,
    NonPositiveParam,
    CorrelationOutOfRange,
    InvalidJumpSpec,
    InvalidGrid,
    NonPositivePrice,
    SeriesTooShort,
    NoValidLagRatio,
    NonPositiveMeanReversion,
    NegativeTheta,
    NegativeSigmaV2,
    SolverDidNotConverge,
    OrderLimitExceeded,
    UnsupportedShape,
    UnsupportedOrder,
    DegenerateGamma,
    AllReplicationsFailed,
    ConfigError,
    IoError,
};

[[nodiscard]] constexpr std::string_view error_name(Errc code) noexcept
{
    switch (code) {
    case Errc::FellerViolation: return "FellerViolation";
    case Errc::NonPositiveParam: return "NonPositiveParam";
    case Errc::CorrelationOutOfRange: return "CorrelationOutOfRange";
    case Errc::InvalidJumpSpec: return "InvalidJumpSpec";
    case Errc::InvalidGrid: return "InvalidGrid";
    case Errc::NonPositivePrice: return "NonPositivePrice";
    case Errc::SeriesTooShort: return "SeriesTooShort";
    case Errc::NoValidLagRatio: return "NoValidLagRatio";
    case Errc::NonPositiveMeanReversion: return "NonPositiveMeanReversion";
    case Errc::NegativeTheta: return "NegativeTheta";
    case Errc::NegativeSigmaV2: return "NegativeSigmaV2";
    case Errc::SolverDidNotConverge: return "SolverDidNotConverge";
    case Errc::OrderLimitExceeded: return "OrderLimitExceeded";
    case Errc::UnsupportedShape: return "UnsupportedShape";
    case Errc::UnsupportedOrder: return "UnsupportedOrder";
    case Errc::DegenerateGamma: return "DegenerateGamma";
    case Errc::AllReplicationsFailed: return "AllReplicationsFailed";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code), message_(message)
    {}

    [[nodiscard]] Errc code() const noexcept { return code_; }
    [[nodiscard]] std::string_view name() const noexcept { return error_name(code_); }
    /// The message without the error-name prefix.
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

private:
    Errc code_;
    std::string message_;
};

} // namespace svmm
