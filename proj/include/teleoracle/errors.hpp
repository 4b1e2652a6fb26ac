#pragma once

#include <stdexcept>
#include <string>

namespace teleoracle {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failure while talking to a remote embedder/reranker/generator endpoint.
/// Carries the endpoint so callers can report which service misbehaved.
class TransportError : public Error {
public:
    TransportError(std::string endpoint, const std::string& cause)
        : Error(endpoint + ": " + cause), endpoint_(std::move(endpoint)) {}

    const std::string& endpoint() const noexcept { return endpoint_; }

private:
    std::string endpoint_;
};

} // namespace teleoracle
