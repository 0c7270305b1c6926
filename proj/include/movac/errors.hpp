#pragma once

#include <stdexcept>
#include <string>

namespace movac {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

struct EmptySetError : Error {
    using Error::Error;
};

// Explored payoffs admit no candidate value vector.
struct InconsistencyError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

struct CapacityError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct CheckpointError : Error {
    using Error::Error;
};

// Caller violated a documented precondition.
struct ContractError : Error {
    using Error::Error;
};

}  // namespace movac
