#pragma once

#include <stdexcept>
#include <string>

namespace scotti {

// All failures surface as typed exceptions. The CLI maps config/parse errors
// to exit code 1 and everything else to exit code 2.

// Shape or dimension mismatch between tensors/operands.
struct dim_error : std::runtime_error {
    explicit dim_error(const std::string& msg) : std::runtime_error("dim error: " + msg) {}
};

// Out-of-range index (class label, neuron id, element access).
struct index_error : std::runtime_error {
    explicit index_error(const std::string& msg) : std::runtime_error("index error: " + msg) {}
};

// An API precondition was violated (wrong call order, non-scalar loss, ...).
struct contract_error : std::logic_error {
    explicit contract_error(const std::string& msg) : std::logic_error("contract error: " + msg) {}
};

// Bad key, value, or combination in a run configuration.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error("config error: " + msg) {}
};

// Malformed text input (config file syntax, dataset file syntax).
struct parse_error : std::runtime_error {
    explicit parse_error(const std::string& msg) : std::runtime_error("parse error: " + msg) {}
};

// Structurally valid input with unusable content (empty dataset, bad label).
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& msg) : std::runtime_error("validation error: " + msg) {}
};

// Filesystem trouble: unreadable input, unwritable output directory.
struct io_error : std::runtime_error {
    explicit io_error(const std::string& msg) : std::runtime_error("io error: " + msg) {}
};

// Numerical failure at run time (non-finite loss, divergence).
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error("numeric error: " + msg) {}
};

}  // namespace scotti
