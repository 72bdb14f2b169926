#pragma once

#include <stdexcept>
#include <string>

namespace biphoton {

// All library errors are argument/contract violations.
struct Error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NonUnitBloch : Error {
    using Error::Error;
};

struct LengthMismatch : Error {
    using Error::Error;
};

struct EmptyChains : Error {
    using Error::Error;
};

struct InvalidConfig : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

}  // namespace biphoton
