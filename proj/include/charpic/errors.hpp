#ifndef CHARPIC_ERRORS_HPP
#define CHARPIC_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace charpic {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- expression language ---

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, const std::string& msg)
        : Error("syntax error at position " + std::to_string(position) + ": " + msg),
          position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

class UnknownVariable : public Error {
public:
    UnknownVariable(std::size_t position, const std::string& name)
        : Error("unknown variable '" + name + "' at position " + std::to_string(position)),
          position_(position), name_(name) {}
    std::size_t position() const { return position_; }
    const std::string& name() const { return name_; }

private:
    std::size_t position_;
    std::string name_;
};

class UnknownFunction : public Error {
public:
    UnknownFunction(std::size_t position, const std::string& name)
        : Error("unknown function '" + name + "' at position " + std::to_string(position)) {}
};

// Division by zero, sqrt of a negative number, or a NaN/Inf intermediate.
class EvalDomainError : public Error {
public:
    explicit EvalDomainError(const std::string& msg) : Error(msg) {}
};

// --- geometry ---

class DegenerateConfiguration : public Error {
public:
    explicit DegenerateConfiguration(const std::string& msg) : Error(msg) {}
};

class PointOutsideRegion : public Error {
public:
    explicit PointOutsideRegion(const std::string& msg) : Error(msg) {}
};

class NotAffine : public Error {
public:
    explicit NotAffine(const std::string& msg) : Error(msg) {}
};

class NotCaseII : public Error {
public:
    explicit NotCaseII(const std::string& msg) : Error(msg) {}
};

class NotCaseI : public Error {
public:
    explicit NotCaseI(const std::string& msg) : Error(msg) {}
};

class InvalidCurve : public Error {
public:
    explicit InvalidCurve(const std::string& msg) : Error(msg) {}
};

// --- fields ---

class GridMismatch : public Error {
public:
    explicit GridMismatch(const std::string& msg) : Error(msg) {}
};

// --- boundary data ---

class SingularConstraint : public Error {
public:
    explicit SingularConstraint(const std::string& msg) : Error(msg) {}
};

class PositivityUnachievable : public Error {
public:
    explicit PositivityUnachievable(const std::string& msg) : Error(msg) {}
};

// --- solvers ---

class ThetaIncompatible : public Error {
public:
    explicit ThetaIncompatible(const std::string& msg) : Error(msg) {}
};

class ContractionUnachievable : public Error {
public:
    explicit ContractionUnachievable(const std::string& msg) : Error(msg) {}
};

// --- configuration ---

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace charpic

#endif
