#pragma once

#include <stdexcept>
#include <string>

namespace kam {

/// Base for all numerical failures raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A named precondition failed (smallness, contraction, nondegeneracy...).
class PreconditionError : public Error {
public:
    PreconditionError(std::string name, const std::string& detail)
        : Error(name + ": " + detail), name_(std::move(name)) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

/// Exact or numerical resonance of the frequency vector.
class ResonanceError : public Error {
public:
    using Error::Error;
};

/// Defect growth during the Newton iteration.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// Malformed or incomplete input (config files, literals).
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace kam
