#pragma once

#include <stdexcept>
#include <string>

namespace fwreg {

enum class ErrorCode {
    shape,
    truncation,
    degenerate_knots,
    numerical_consistency,
    split,
    fold_size,
    cap,
    nuisance_range,
    link_domain,
    weak_instrument,
    density,
    sample_size,
    fit,
    separation,
    under_identified,
    registry,
    grid,
    config,
    schema,
    parse,
    io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& what);

}  // namespace fwreg
