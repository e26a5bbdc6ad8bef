#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace autotool {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input that never made it past the tokenizer/JSON layer.
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t byte_offset)
        : Error(msg + " (byte " + std::to_string(byte_offset) + ")"),
          byte_offset(byte_offset) {}
    std::size_t byte_offset;
};

/// Well-formed input that violates a schema or structural invariant.
struct SchemaError : Error {
    using Error::Error;
};

struct ArgumentError : Error {
    using Error::Error;
};

struct ConflictError : Error {
    using Error::Error;
};

struct NotFoundError : Error {
    using Error::Error;
};

struct UnknownToolError : Error {
    using Error::Error;
};

struct AdapterError : Error {
    using Error::Error;
};

} // namespace autotool
