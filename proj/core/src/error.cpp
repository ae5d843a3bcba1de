#include "fwreg/error.hpp"

namespace fwreg {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::shape: return "shape";
        case ErrorCode::truncation: return "truncation";
        case ErrorCode::degenerate_knots: return "degenerate-knots";
        case ErrorCode::numerical_consistency: return "numerical-consistency";
        case ErrorCode::split: return "split";
        case ErrorCode::fold_size: return "fold-size";
        case ErrorCode::cap: return "cap";
        case ErrorCode::nuisance_range: return "nuisance-range";
        case ErrorCode::link_domain: return "link-domain";
        case ErrorCode::weak_instrument: return "weak-instrument";
        case ErrorCode::density: return "density";
        case ErrorCode::sample_size: return "sample-size";
        case ErrorCode::fit: return "fit";
        case ErrorCode::separation: return "separation";
        case ErrorCode::under_identified: return "under-identified";
        case ErrorCode::registry: return "registry";
        case ErrorCode::grid: return "grid";
        case ErrorCode::config: return "config";
        case ErrorCode::schema: return "schema";
        case ErrorCode::parse: return "parse";
        case ErrorCode::io: return "io";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + " error: " + what), code_(code) {}

void raise(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace fwreg
