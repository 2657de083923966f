#include "ctxr/error.hpp"

namespace ctxr {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::format: return "format";
    case ErrorCode::unsupported_datatype: return "unsupported-datatype";
    case ErrorCode::io: return "io";
    case ErrorCode::argument: return "argument";
    case ErrorCode::degenerate_volume: return "degenerate-volume";
    case ErrorCode::degenerate_input: return "degenerate-input";
    case ErrorCode::missing_dependency: return "missing-dependency";
    case ErrorCode::view_mismatch: return "view-mismatch";
    case ErrorCode::insufficient_cohort: return "insufficient-cohort";
    case ErrorCode::empty_mask: return "empty-mask";
    case ErrorCode::degenerate_geometry: return "degenerate-geometry";
    case ErrorCode::insufficient_landmarks: return "insufficient-landmarks";
    case ErrorCode::numeric_domain: return "numeric-domain";
    case ErrorCode::degenerate_sample: return "degenerate-sample";
    case ErrorCode::undefined_metric: return "undefined-metric";
    case ErrorCode::spec: return "spec";
    case ErrorCode::taxonomy_mismatch: return "taxonomy-mismatch";
    case ErrorCode::config: return "config";
    }
    return "unknown";
}

} // namespace ctxr
