#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nontextpd {

enum class ErrorCode {
    schema_error,
    dangling_citation,
    offset_out_of_range,
    duplicate_reference,
    invalid_argument,
    empty_denominator,
    length_mismatch,
    dimension_mismatch,
    zero_vector,
    rel_undefined,
    unit_unavailable,
    both_empty,
    below_identifier_floor,
    document_too_short,
    degenerate_image,
    no_bars_found,
    bar_count_mismatch,
    no_shared_grams,
    too_few_distances,
    duplicate_doc_id,
    unknown_doc_id,
    unknown_method,
    io_error,
};

constexpr std::string_view error_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::schema_error: return "SchemaError";
    case ErrorCode::dangling_citation: return "DanglingCitation";
    case ErrorCode::offset_out_of_range: return "OffsetOutOfRange";
    case ErrorCode::duplicate_reference: return "DuplicateReference";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::empty_denominator: return "EmptyDenominator";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::zero_vector: return "ZeroVector";
    case ErrorCode::rel_undefined: return "RelUndefined";
    case ErrorCode::unit_unavailable: return "UnitUnavailable";
    case ErrorCode::both_empty: return "BothEmpty";
    case ErrorCode::below_identifier_floor: return "BelowIdentifierFloor";
    case ErrorCode::document_too_short: return "DocumentTooShort";
    case ErrorCode::degenerate_image: return "DegenerateImage";
    case ErrorCode::no_bars_found: return "NoBarsFound";
    case ErrorCode::bar_count_mismatch: return "BarCountMismatch";
    case ErrorCode::no_shared_grams: return "NoSharedGrams";
    case ErrorCode::too_few_distances: return "TooFewDistances";
    case ErrorCode::duplicate_doc_id: return "DuplicateDocId";
    case ErrorCode::unknown_doc_id: return "UnknownDocId";
    case ErrorCode::unknown_method: return "UnknownMethod";
    case ErrorCode::io_error: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    std::string_view name() const noexcept { return error_name(code_); }

private:
    ErrorCode code_;
};

} // namespace nontextpd
