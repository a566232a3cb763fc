#pragma once

#include <stdexcept>
#include <string>

namespace evopat {

enum class ErrorCode {
    // ingest
    ImageOnlyPdf,
    ExtractorFailed,
    EncodingError,
    EmptyAfterFilter,
    // embedindex
    InvalidChunkParams,
    ProviderUnavailable,
    DimensionMismatch,
    IoError,
    CorruptIndex,
    // context
    BudgetImpossible,
    // llm
    Transport,
    Auth,
    RateLimited,
    MalformedResponse,
    // tools
    NotFound,
    Backend,
    FixtureMissing,
    EmptyKeywords,
    TooManyKeywords,
    UnknownTool,
    HandlerError,
    // agents
    TurnLimitExceeded,
    // report
    MissingSection,
    ConverterUnconfigured,
    ConverterFailed,
    // eval
    EmptyReference,
    NoReferenceBigrams,
    EmptySequence,
    EmptyInput,
    // cli
    ConfigError,
};

const char* error_code_name(ErrorCode code);

// Single exception type for all domain errors; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace evopat
