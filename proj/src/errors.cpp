#include "evopat/errors.hpp"

namespace evopat {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ImageOnlyPdf: return "ImageOnlyPdf";
        case ErrorCode::ExtractorFailed: return "ExtractorFailed";
        case ErrorCode::EncodingError: return "EncodingError";
        case ErrorCode::EmptyAfterFilter: return "EmptyAfterFilter";
        case ErrorCode::InvalidChunkParams: return "InvalidChunkParams";
        case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::CorruptIndex: return "CorruptIndex";
        case ErrorCode::BudgetImpossible: return "BudgetImpossible";
        case ErrorCode::Transport: return "Transport";
        case ErrorCode::Auth: return "Auth";
        case ErrorCode::RateLimited: return "RateLimited";
        case ErrorCode::MalformedResponse: return "MalformedResponse";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::Backend: return "Backend";
        case ErrorCode::FixtureMissing: return "FixtureMissing";
        case ErrorCode::EmptyKeywords: return "EmptyKeywords";
        case ErrorCode::TooManyKeywords: return "TooManyKeywords";
        case ErrorCode::UnknownTool: return "UnknownTool";
        case ErrorCode::HandlerError: return "HandlerError";
        case ErrorCode::TurnLimitExceeded: return "TurnLimitExceeded";
        case ErrorCode::MissingSection: return "MissingSection";
        case ErrorCode::ConverterUnconfigured: return "ConverterUnconfigured";
        case ErrorCode::ConverterFailed: return "ConverterFailed";
        case ErrorCode::EmptyReference: return "EmptyReference";
        case ErrorCode::NoReferenceBigrams: return "NoReferenceBigrams";
        case ErrorCode::EmptySequence: return "EmptySequence";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "UnknownError";
}

} // namespace evopat
