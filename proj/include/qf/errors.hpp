#pragma once

#include <stdexcept>
#include <string>

namespace qf {

// Exception families map onto CLI exit codes: usage 2, schema/io 3, numerical 4.

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised whenever holdout-backend data would enter a training-side computation.
class LeakageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace qf
