#pragma once

#include <stdexcept>
#include <string>

namespace ztc {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or usage: bad thresholds, bad search limits,
// cyclic required-edge sets, malformed flags.
struct ConfigError : Error {
    using Error::Error;
};

// Input does not match the expected schema: missing column, unknown
// variable or value.
struct SchemaError : Error {
    using Error::Error;
};

// Unparsable input content; the message carries a line number when known.
struct ParseError : Error {
    using Error::Error;
};

// A graph operation would create (or detected) a cycle; the message
// names one cycle.
struct CycleError : Error {
    using Error::Error;
};

// A model document failed validation on load.
struct ValidationError : Error {
    using Error::Error;
};

// The supplied evidence has probability zero under the model. The decision
// layer maps this to a block: a never-seen combination is never allowed.
struct ZeroEvidenceError : Error {
    using Error::Error;
};

} // namespace ztc
