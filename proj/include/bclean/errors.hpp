#pragma once

#include <stdexcept>
#include <string>

namespace bclean {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : Error {
    using Error::Error;
};

// CSV row whose arity disagrees with the header.
struct RaggedRow : Error {
    RaggedRow(std::size_t row, std::size_t got, std::size_t want)
        : Error("ragged row " + std::to_string(row) + ": " + std::to_string(got) +
                " fields, expected " + std::to_string(want)),
          row(row) {}
    std::size_t row;
};

struct EmptyTable : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct NotPositiveDefinite : Error {
    using Error::Error;
};

struct CycleError : Error {
    using Error::Error;
};

struct MissingEdge : Error {
    using Error::Error;
};

struct EmptyDomain : Error {
    using Error::Error;
};

struct ShapeMismatch : Error {
    using Error::Error;
};

}  // namespace bclean
