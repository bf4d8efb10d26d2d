#pragma once

#include <stdexcept>
#include <string>

namespace bevtraj {

// Error taxonomy maps onto CLI exit codes:
//   config_error -> 2, io_error -> 3, numeric_error -> 4.

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct shape_error : config_error {
    using config_error::config_error;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct parse_error : io_error {
    using io_error::io_error;
};

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace bevtraj
