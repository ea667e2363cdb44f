#include "bandflow/error.hpp"

namespace bandflow {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::GridMismatch: return "grid-mismatch";
        case ErrorCode::InsufficientCoverage: return "insufficient-coverage";
        case ErrorCode::InsufficientPadding: return "insufficient-padding";
        case ErrorCode::NyquistViolation: return "nyquist-violation";
        case ErrorCode::KernelTooWide: return "kernel-too-wide";
        case ErrorCode::EmptyBand: return "empty-band";
        case ErrorCode::BandCoverage: return "band-coverage";
        case ErrorCode::ValueBound: return "value-bound";
        case ErrorCode::QuadratureDiverged: return "quadrature-diverged";
        case ErrorCode::ConfigParse: return "config-parse";
        case ErrorCode::ConfigMissingKey: return "config-missing-key";
        case ErrorCode::ManifestMismatch: return "manifest-mismatch";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

}  // namespace bandflow
