#pragma once

#include <stdexcept>
#include <string>

namespace sensi {

// Bad data, bad schema, bad configuration. The CLI maps this to exit code 2.
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A resource cap was exceeded (enumeration size, subset count).
struct cap_error : input_error {
    using input_error::input_error;
};

// The solver failed its convergence contract. The CLI maps this to exit code 3.
struct solver_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sensi
