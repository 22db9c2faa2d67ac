#pragma once

#include <stdexcept>
#include <string>

namespace sej {

enum class Errc {
    // input / validation
    NonMonotoneQuantiles,
    MissingRealization,
    EmptyStudy,
    DuplicatePair,
    SelfPair,
    InvalidEntry,
    UnknownCategory,
    MissingAssessment,
    NoCalibrationQuestions,
    DimensionMismatch,
    TooFewSamples,
    NegativeArgument,
    OutOfSupport,
    Syntax,
    Validation,
    UnsupportedVersion,
    // numerical
    AllExpertsExcluded,
    RepairDriftExceeded,
    FactorizationFailure,
};

const char* errc_name(Errc c) noexcept;

// Exit status category used by the CLI: 2 = input/validation, 3 = numerical.
int errc_exit_code(Errc c) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }
    int exit_code() const noexcept { return errc_exit_code(code_); }

private:
    Errc code_;
};

} // namespace sej
