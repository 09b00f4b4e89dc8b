#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace molstore {

/// Broad failure classes. The CLI prints the category name as the first
/// token of its one-line error report.
enum class ErrorCategory {
    Length,       // odd bit payload, run length outside tolerance
    Alphabet,     // symbol not valid for the format or scheme
    Range,        // argument outside a tabulated range
    Precondition, // operation called outside its domain
    Parameter,    // invalid numeric parameter
    Config,       // invalid configuration or calibration
    Format,       // malformed file contents
    Io,           // file could not be opened/read/written
};

std::string_view category_name(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what,
          std::optional<std::size_t> index = std::nullopt)
        : std::runtime_error(what), category_(category), index_(index)
    {}

    ErrorCategory category() const noexcept { return category_; }

    /// Position of the offending element (run, line, sample) when known.
    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    ErrorCategory category_;
    std::optional<std::size_t> index_;
};

} // namespace molstore
