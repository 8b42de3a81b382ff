#pragma once

#include <stdexcept>
#include <string>

namespace sau {

// Error taxonomy. Each kind maps to a distinct CLI exit code (see tools/).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape preconditions: empty shapes, zero dims, incompatible operands.
struct ShapeError : Error {
    using Error::Error;
};

// Token / index out of range.
struct IndexError : Error {
    using Error::Error;
};

// Violated operation contract (empty batch, non-scalar loss, stale plan...).
struct ContractError : Error {
    using Error::Error;
};

// Invalid configuration value; message names the offending field.
struct ConfigError : Error {
    using Error::Error;
};

// Dataset generation failure (e.g. vocab too small for unique keys).
struct GenerationError : Error {
    using Error::Error;
};

// Training diverged; message names the epoch.
struct TrainingError : Error {
    using Error::Error;
};

// Unlearning step produced a non-finite loss; message names the batch.
struct UnlearningError : Error {
    using Error::Error;
};

// File-level I/O failures.
struct IoError : Error {
    using Error::Error;
};

// Checkpoint payload does not match its trailing content hash.
struct CorruptCheckpointError : IoError {
    using IoError::IoError;
};

// Checkpoint carries an unknown format version.
struct VersionError : IoError {
    using IoError::IoError;
};

// Plan was built against a different mask/saliency than the one supplied.
struct HashMismatchError : ContractError {
    using ContractError::ContractError;
};

}  // namespace sau
