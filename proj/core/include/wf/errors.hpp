#pragma once

#include <stdexcept>
#include <string>

namespace wf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent model / input document.
class ModelError : public Error {
public:
    using Error::Error;
};

class AddressError : public Error {
public:
    using Error::Error;
};

class EditError : public Error {
public:
    enum class Kind { not_a_bud, locked, sort_mismatch, arity_mismatch };

    EditError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Two replicas disagree on the development of the node at `address`.
class ConflictError : public Error {
public:
    ConflictError(std::string address, const std::string& what)
        : Error(what + " at " + address), address_(std::move(address)) {}
    const std::string& address() const noexcept { return address_; }

private:
    std::string address_;
};

/// A state that a valid choreography cannot reach.
class InvariantError : public Error {
public:
    using Error::Error;
};

class NoConsensusError : public Error {
public:
    using Error::Error;
};

class AccreditationError : public Error {
public:
    using Error::Error;
};

class RoutingError : public Error {
public:
    using Error::Error;
};

/// A decision that the engine refuses to apply.
class DecisionError : public Error {
public:
    enum class Kind { stale, not_offered, illegal_production, script_exhausted, script_mismatch };

    DecisionError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

}  // namespace wf
