#pragma once

#include <stdexcept>
#include <string>

namespace smnuc {

/// Raised when a search range (SNR sweep, anchor bisection) never reaches its target.
class RangeExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
    throw std::invalid_argument(where + ": " + what);
}

}  // namespace detail

using detail::fail;

}  // namespace smnuc
