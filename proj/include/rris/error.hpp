#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rris {

enum class ErrorCode {
    shape_mismatch,
    malformed_rle,
    empty_input,
    invalid_argument,
    no_negatives,
    degenerate_denominator,
    duplicate_reference,
    empty_expression,
    no_absent_category,
    generation_exhausted,
    parse_error,
    dangling_reference,
    io_error,
    token_overflow,
    nonfinite_gradient,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::shape_mismatch: return "shape-mismatch";
    case ErrorCode::malformed_rle: return "malformed-rle";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::no_negatives: return "no-negatives";
    case ErrorCode::degenerate_denominator: return "degenerate-denominator";
    case ErrorCode::duplicate_reference: return "duplicate-reference";
    case ErrorCode::empty_expression: return "empty-expression";
    case ErrorCode::no_absent_category: return "no-absent-category";
    case ErrorCode::generation_exhausted: return "generation-exhausted";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::dangling_reference: return "dangling-reference";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::token_overflow: return "token-overflow";
    case ErrorCode::nonfinite_gradient: return "nonfinite-gradient";
    }
    return "unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// that callers (the CLI in particular) can map it to a stable exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace rris
