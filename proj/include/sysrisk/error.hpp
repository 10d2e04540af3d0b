#pragma once

#include <stdexcept>
#include <string>

namespace sysrisk {

enum class Errc {
    DimensionMismatch,
    NotPSD,
    NonPositiveAlpha,
    NonNegativeBudget,
    NonPositiveBeta,
    InvalidPartition,
    SingleBlock,
    InvalidWeights,
    NotMember,
    ZeroWeight,
    InvalidSplit,
    EmptyCounterparty,
    TooLarge,
    NotConverged,
    DegenerateWeights,
    NotIID,
    ParseError,
    UnknownExample,
    NonPositivePrice,
    TooFewRows,
    ZeroVariance,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc c, const std::string& what)
        : std::runtime_error(std::string(errc_name(c)) + ": " + what), code_(c) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace sysrisk
