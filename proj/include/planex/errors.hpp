#ifndef PLANEX_ERRORS_HPP
#define PLANEX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace planex {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A condition references identifiers unknown to the state it is evaluated against.
class MalformedConditionError : public Error {
public:
    using Error::Error;
};

// A state update that cannot be reconciled with the execution record,
// e.g. ending an action that was never started.
class InconsistentApplicationError : public Error {
public:
    using Error::Error;
};

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, int line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class GroundingError : public Error {
public:
    using Error::Error;
    GroundingError(const std::string& what, int line)
        : Error("line " + std::to_string(line) + ": " + what) {}
};

class UnsupportedFeatureError : public Error {
public:
    explicit UnsupportedFeatureError(const std::string& construct)
        : Error("unsupported construct: " + construct) {}
};

// The input time-triggered plan does not execute against the model.
class InvalidPlanError : public Error {
public:
    using Error::Error;
};

// The extraction result set exceeded its configured cap.
class CapacityError : public Error {
public:
    using Error::Error;
};

class PlannerError : public Error {
public:
    using Error::Error;
};

// Malformed executor feedback (unknown action or node identifiers).
class ProtocolError : public Error {
public:
    using Error::Error;
};

}  // namespace planex

#endif
