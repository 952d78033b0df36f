#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cotkd {

enum class Errc {
    InvalidArgument,
    Io,
    NotANumber,
    ParseError,
    DuplicateId,
    EmptySplit,
    InvalidK,
    MissingAnnotations,
    InconsistentExemplar,
    EmptyPool,
    IdMismatch,
    DuplicatePrediction,
    UnknownId,
    DivisionByZero,
    AuthError,
    RateLimited,
    TransportError,
    MalformedResponse,
};

// Coarse grouping used for CLI exit codes and the one-line error output.
enum class ErrorCategory { Usage, Input, Transport, Validation };

std::string_view errc_name(Errc e);
ErrorCategory category_of(Errc e);
std::string_view category_name(ErrorCategory c);
int exit_code(ErrorCategory c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(detail), code_(code) {}

    Errc code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_of(code_); }

private:
    Errc code_;
};

}  // namespace cotkd
