#pragma once

#include <stdexcept>
#include <string>

namespace macroplace {

// Base for every error raised by the library. Subclasses map onto the failure
// modes the CLI reports with distinct exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class KTooLarge : public Error {
public:
    using Error::Error;
};

class IllegalPlacement : public Error {
public:
    using Error::Error;
};

class IllegalAction : public Error {
public:
    using Error::Error;
};

class NoLegalAction : public Error {
public:
    using Error::Error;
};

class UnplacedEndpoint : public Error {
public:
    using Error::Error;
};

class NotDone : public Error {
public:
    using Error::Error;
};

class EmptyMask : public Error {
public:
    using Error::Error;
};

class NonFiniteLoss : public Error {
public:
    using Error::Error;
};

class InconsistentPlacement : public Error {
public:
    using Error::Error;
};

}  // namespace macroplace
