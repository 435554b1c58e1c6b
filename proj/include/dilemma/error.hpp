#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dilemma {

enum class ErrorCode {
    // corpus
    UnknownSectionHeading,
    NoSectionsFound,
    MissingCase,
    MalformedRecord,
    SectionRuleViolation,
    // textprep / metrics
    InvalidN,
    EmptyCollection,
    UnknownMetric,
    // embeddings
    ProviderUnavailable,
    DimensionMismatch,
    MalformedServiceReply,
    NonDeterministicProvider,
    // ranking
    ItemSetMismatch,
    NonFiniteScore,
    EmptyCategory,
    // weighting
    TooFewCategories,
    NotReciprocal,
    NonPositiveEntry,
    NoConvergence,
    Inconsistent,
    CategoryMismatch,
    // scoring
    CaseMismatch,
    NoReferences,
    // harness
    UnboundPlaceholder,
    ParseFailure,
    ReplayMiss,
    ClientError,
    TemplateTampered,
    // report
    MissingCohort,
    // generic
    InvalidArgument,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. The code identifies the contract
/// violation; the message carries the offending value.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace dilemma
