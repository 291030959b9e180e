#pragma once

#include <stdexcept>
#include <string>

namespace gerber {

// Input data failed validation: malformed CSV, non-finite values,
// zero-variance columns, dimension mismatches. CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A variant-specific precondition does not hold for the given data, e.g. an
// asset that never pierces its threshold under gs1, or a pair whose
// observations are all jointly neutral under gs2. CLI maps this to exit code 2.
class PreconditionError : public std::runtime_error {
public:
    explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace gerber
