#pragma once

#include <stdexcept>
#include <string>

namespace scmem {

// Bad user-supplied value (dimension, probability, size spec, ...).
struct invalid_parameter : std::invalid_argument {
    explicit invalid_parameter(const std::string& what) : std::invalid_argument(what) {}
};

// A closed-form expression was asked for outside the regime where it is valid
// (e.g. a tail exponent evaluated below its crossover point).
struct out_of_regime : std::domain_error {
    explicit out_of_regime(const std::string& what) : std::domain_error(what) {}
};

// Restricted decoding was attempted but no candidate falls inside the window.
struct empty_window_error : std::domain_error {
    explicit empty_window_error(const std::string& what) : std::domain_error(what) {}
};

// A caller violated a documented precondition that we can detect at run time.
struct contract_error : std::logic_error {
    explicit contract_error(const std::string& what) : std::logic_error(what) {}
};

// Divergence or loss of meaning in an iterative numeric routine.
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace scmem
