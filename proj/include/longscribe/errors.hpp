#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace longscribe {

// Base type for everything the toolkit throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kNoRecord = static_cast<std::size_t>(-1);

// A structured document has a missing field, a wrong type, or an
// out-of-vocabulary value. record_index is kNoRecord for document-level
// problems.
class SchemaError : public Error {
public:
    SchemaError(const std::string& msg, std::size_t record = kNoRecord)
        : Error(record == kNoRecord ? msg : msg + " (record " + std::to_string(record) + ")"),
          record_index(record) {}
    std::size_t record_index;
};

// A well-typed value violates a domain invariant (end < start, tag+words
// conflict, word timing outside its segment, ...).
class InvariantError : public Error {
public:
    InvariantError(const std::string& msg, std::size_t record = kNoRecord)
        : Error(record == kNoRecord ? msg : msg + " (record " + std::to_string(record) + ")"),
          record_index(record) {}
    std::size_t record_index;
};

// A rich-stream line does not match the grammar. Line and column are 1-based.
class GrammarError : public Error {
public:
    GrammarError(const std::string& msg, std::size_t line, std::size_t column)
        : Error(msg + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line(line),
          column(column) {}
    std::size_t line;
    std::size_t column;
};

class EmptySegment : public Error {
public:
    using Error::Error;
};

class UnsortedInput : public Error {
public:
    using Error::Error;
};

class MissingTimings : public Error {
public:
    using Error::Error;
};

class EmptyReference : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class BadParams : public Error {
public:
    using Error::Error;
};

class BadStage : public Error {
public:
    using Error::Error;
};

class EmptyCorpus : public Error {
public:
    using Error::Error;
};

}  // namespace longscribe
