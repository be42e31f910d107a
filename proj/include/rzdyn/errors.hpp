#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rzdyn {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two classes (or a class and a prime set) live over different prime trees.
class AmbientMismatch : public Error {
public:
    using Error::Error;
};

/// A prime set that is not closed under parents, i.e. not a blowup model.
class InvalidModel : public Error {
public:
    using Error::Error;
};

class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// Malformed input: bad fan, bad JSON, inconsistent polynomial degrees...
class ValidationError : public Error {
public:
    using Error::Error;
};

/// The map is not dominant (singular exponent matrix, zero Jacobian...).
class DominanceError : public Error {
public:
    using Error::Error;
};

class DegeneracyError : public Error {
public:
    using Error::Error;
};

/// A toric map is not holomorphic between the supplied fans.
class NotHolomorphic : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class HeuristicFailure : public Error {
public:
    using Error::Error;
};

/// A resource cap was hit. Carries whatever integer results were finished.
class CapacityError : public Error {
public:
    CapacityError(const std::string& what, std::vector<long long> partial = {})
        : Error(what), partial_(std::move(partial)) {}

    const std::vector<long long>& partial() const noexcept { return partial_; }

private:
    std::vector<long long> partial_;
};

}  // namespace rzdyn
