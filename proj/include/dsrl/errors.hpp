#ifndef DSRL_ERRORS_HPP
#define DSRL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dsrl {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rejection sampling ran out of attempts; the network parameters are
/// probably infeasible.
class GenerationExhausted : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class SizeMismatch : public Error {
public:
    using Error::Error;
};

/// An iterate left the finite reals, usually because the schedule diverges.
class NonFiniteState : public Error {
public:
    using Error::Error;
};

/// Invalid configuration. The message starts with the offending field path.
class ConfigInvalid : public Error {
public:
    ConfigInvalid(const std::string& field, const std::string& what)
        : Error(field + ": " + what), field_(field) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace dsrl

#endif // DSRL_ERRORS_HPP
