#ifndef FACET_ERRORS_HPP
#define FACET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace facet {

// Invalid configuration, bad input file, missing field, out-of-range value.
// The CLI maps this to exit code 2.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Dimension mismatch between tensors, nets and data.
struct shape_error : config_error {
    explicit shape_error(const std::string& msg) : config_error(msg) {}
};

// Non-finite values where finite ones are required (divergence, NaN input).
// The CLI maps this to exit code 3.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace facet

#endif
