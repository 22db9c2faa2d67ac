#include "sej/error.hpp"

namespace sej {

const char* errc_name(Errc c) noexcept {
    switch (c) {
    case Errc::NonMonotoneQuantiles: return "NonMonotoneQuantiles";
    case Errc::MissingRealization: return "MissingRealization";
    case Errc::EmptyStudy: return "EmptyStudy";
    case Errc::DuplicatePair: return "DuplicatePair";
    case Errc::SelfPair: return "SelfPair";
    case Errc::InvalidEntry: return "InvalidEntry";
    case Errc::UnknownCategory: return "UnknownCategory";
    case Errc::MissingAssessment: return "MissingAssessment";
    case Errc::NoCalibrationQuestions: return "NoCalibrationQuestions";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::NegativeArgument: return "NegativeArgument";
    case Errc::OutOfSupport: return "OutOfSupport";
    case Errc::Syntax: return "Syntax";
    case Errc::Validation: return "Validation";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::AllExpertsExcluded: return "AllExpertsExcluded";
    case Errc::RepairDriftExceeded: return "RepairDriftExceeded";
    case Errc::FactorizationFailure: return "FactorizationFailure";
    }
    return "UnknownError";
}

int errc_exit_code(Errc c) noexcept {
    switch (c) {
    case Errc::AllExpertsExcluded:
    case Errc::RepairDriftExceeded:
    case Errc::FactorizationFailure:
        return 3;
    default:
        return 2;
    }
}

} // namespace sej
