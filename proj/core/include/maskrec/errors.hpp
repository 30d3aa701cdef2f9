#pragma once

#include <stdexcept>
#include <string>

namespace maskrec {

// Error taxonomy. The CLI maps these onto exit codes: UsageError -> 2,
// ConfigError -> 3, everything else -> 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad arguments to a library call (out-of-range magnitude, empty batch, ...).
struct ArgumentError : Error {
  using Error::Error;
};

// Malformed external input (manifest line, landmark file, ...).
struct ParseError : Error {
  using Error::Error;
};

// Structurally valid input that violates a domain invariant.
struct ValidationError : Error {
  using Error::Error;
};

// A caller broke a documented precondition (fake face in stage-1 training,
// mixed video ids, single-class split, ...).
struct ContractViolation : Error {
  using Error::Error;
};

// Checkpoint problems: stage mismatch, digest mismatch, truncation.
struct CheckpointError : Error {
  using Error::Error;
};

// Model/config shape disagreement.
struct ConfigError : Error {
  using Error::Error;
};

// Metric undefined for the given input (single-class score set, all-degenerate
// correlation analysis).
struct MetricError : Error {
  using Error::Error;
};

// Bad command line.
struct UsageError : Error {
  using Error::Error;
};

// I/O failure outside of parsing (missing file, short read/write).
struct IoError : Error {
  using Error::Error;
};

}  // namespace maskrec
