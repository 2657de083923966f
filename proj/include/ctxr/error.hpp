#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ctxr {

enum class ErrorCode {
    format,
    unsupported_datatype,
    io,
    argument,
    degenerate_volume,
    degenerate_input,
    missing_dependency,
    view_mismatch,
    insufficient_cohort,
    empty_mask,
    degenerate_geometry,
    insufficient_landmarks,
    numeric_domain,
    degenerate_sample,
    undefined_metric,
    spec,
    taxonomy_mismatch,
    config,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. The code is the stable, machine-readable part;
/// the message carries context (paths, class names, byte counts).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace ctxr
