#pragma once

#include <stdexcept>
#include <string>

namespace daflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid geometry or grid description.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Invalid numerical parameter (weights, tolerances, factors).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Moment matrix could not be inverted for a node.
class StencilError : public Error {
public:
    StencilError(std::size_t node, const std::string& what)
        : Error("stencil error at node " + std::to_string(node) + ": " + what), node_(node) {}

    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

/// Bad index or dimension while building or applying a sparse matrix.
class AssemblyError : public Error {
public:
    using Error::Error;
};

/// Preconditioner cannot be built (zero pivot / zero diagonal).
class PreconditionerError : public Error {
public:
    using Error::Error;
};

/// Linear system is singular by construction (e.g. unpinned pure-Neumann Poisson).
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Requested operation is not available for this input (wrong dimension, no grid).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace daflow
