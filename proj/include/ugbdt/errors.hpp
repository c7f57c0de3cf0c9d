#pragma once

#include <stdexcept>
#include <string>

namespace ugbdt {

// Error categories map one-to-one onto CLI exit codes (see tools/).
//   ValidationError -> 2   bad configuration or arguments
//   DataError       -> 3   malformed or inconsistent input data
//   NumericError    -> 4   non-finite values or numeric breakdown

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ugbdt
