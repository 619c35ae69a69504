#pragma once

#include <stdexcept>
#include <string>

namespace supra {

// Base of every error raised by the library. Subclasses map to the CLI exit
// codes: ParamError is a usage/config error, the rest are runtime/data errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class ParamError : public Error {
public:
    using Error::Error;
};

class StateError : public Error {
public:
    using Error::Error;
};

} // namespace supra
