#include "molstore/error.hpp"

namespace molstore {

std::string_view category_name(ErrorCategory c) noexcept
{
    switch (c) {
    case ErrorCategory::Length: return "length";
    case ErrorCategory::Alphabet: return "alphabet";
    case ErrorCategory::Range: return "range";
    case ErrorCategory::Precondition: return "precondition";
    case ErrorCategory::Parameter: return "parameter";
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Format: return "format";
    case ErrorCategory::Io: return "io";
    }
    return "unknown";
}

} // namespace molstore
