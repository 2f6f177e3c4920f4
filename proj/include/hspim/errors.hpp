#pragma once

#include <stdexcept>
#include <string>

namespace hspim {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad arguments, bad config, malformed CLI usage. Maps to exit code 2.
class UsageError : public Error {
public:
    using Error::Error;
};

class CorpusError : public Error {
public:
    using Error::Error;
};

class GatewayError : public Error {
public:
    using Error::Error;
};

// Network / endpoint failure that survived all retry attempts.
class TransportError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

// Credential rejected. Never retried.
class AuthError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

// Gateway-level call budget exhausted.
class BudgetError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

// Provider output violated the structured-output contract even after the
// corrective reprompt.
class JsonContractError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class PipelineError : public Error {
public:
    using Error::Error;
};

class AggregationError : public Error {
public:
    using Error::Error;
};

}  // namespace hspim
