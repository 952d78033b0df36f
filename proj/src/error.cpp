#include "cotkd/error.hpp"

namespace cotkd {

std::string_view errc_name(Errc e) {
    switch (e) {
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::Io: return "IoError";
        case Errc::NotANumber: return "NotANumber";
        case Errc::ParseError: return "ParseError";
        case Errc::DuplicateId: return "DuplicateId";
        case Errc::EmptySplit: return "EmptySplit";
        case Errc::InvalidK: return "InvalidK";
        case Errc::MissingAnnotations: return "MissingAnnotations";
        case Errc::InconsistentExemplar: return "InconsistentExemplar";
        case Errc::EmptyPool: return "EmptyPool";
        case Errc::IdMismatch: return "IdMismatch";
        case Errc::DuplicatePrediction: return "DuplicatePrediction";
        case Errc::UnknownId: return "UnknownId";
        case Errc::DivisionByZero: return "DivisionByZero";
        case Errc::AuthError: return "AuthError";
        case Errc::RateLimited: return "RateLimited";
        case Errc::TransportError: return "TransportError";
        case Errc::MalformedResponse: return "MalformedResponse";
    }
    return "Unknown";
}

ErrorCategory category_of(Errc e) {
    switch (e) {
        case Errc::InvalidArgument:
            return ErrorCategory::Usage;
        case Errc::Io:
        case Errc::NotANumber:
        case Errc::ParseError:
            return ErrorCategory::Input;
        case Errc::AuthError:
        case Errc::RateLimited:
        case Errc::TransportError:
        case Errc::MalformedResponse:
            return ErrorCategory::Transport;
        default:
            return ErrorCategory::Validation;
    }
}

std::string_view category_name(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::Usage: return "usage";
        case ErrorCategory::Input: return "input";
        case ErrorCategory::Transport: return "transport";
        case ErrorCategory::Validation: return "validation";
    }
    return "unknown";
}

int exit_code(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::Usage: return 2;
        case ErrorCategory::Input: return 3;
        case ErrorCategory::Transport: return 4;
        case ErrorCategory::Validation: return 5;
    }
    return 1;
}

}  // namespace cotkd
