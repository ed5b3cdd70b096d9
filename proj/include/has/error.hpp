#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace has {

enum class ErrorCode {
    file_not_found,
    unsupported_format,
    corrupt_header,
    io_failure,
    too_many_regions,
    band_out_of_range,
    kernel_too_large,
    empty_histogram,
    dimension_mismatch,
    empty_class,
    even_window,
    invalid_spec,
    invalid_argument,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::file_not_found: return "file-not-found";
    case ErrorCode::unsupported_format: return "unsupported-format";
    case ErrorCode::corrupt_header: return "corrupt-header";
    case ErrorCode::io_failure: return "io-failure";
    case ErrorCode::too_many_regions: return "too-many-regions";
    case ErrorCode::band_out_of_range: return "band-out-of-range";
    case ErrorCode::kernel_too_large: return "kernel-too-large";
    case ErrorCode::empty_histogram: return "empty-histogram";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::empty_class: return "empty-class";
    case ErrorCode::even_window: return "even-window";
    case ErrorCode::invalid_spec: return "invalid-spec";
    case ErrorCode::invalid_argument: return "invalid-argument";
    }
    return "unknown";
}

/// Library-wide exception. Carries a machine-checkable code and, for file
/// errors, the offending path.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string path = {})
        : std::runtime_error(compose(code, message, path)), code_(code), path_(std::move(path)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& path() const noexcept { return path_; }

private:
    static std::string compose(ErrorCode code, const std::string& message, const std::string& path) {
        std::string out(to_string(code));
        if (!path.empty())
            out += " [" + path + "]";
        if (!message.empty())
            out += ": " + message;
        return out;
    }

    ErrorCode code_;
    std::string path_;
};

} // namespace has
