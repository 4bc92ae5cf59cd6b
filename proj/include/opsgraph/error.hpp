#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace opsgraph {

/// Base for every failure raised by the pipeline stages.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyDocument : public Error {
public:
    EmptyDocument() : Error("document text is empty") {}
};

class InvalidEncoding : public Error {
public:
    explicit InvalidEncoding(std::size_t byte_offset)
        : Error("invalid UTF-8 at byte " + std::to_string(byte_offset)), byte_offset_(byte_offset) {}
    std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

class MissingExemplars : public Error {
public:
    MissingExemplars() : Error("at least one few-shot exemplar is required") {}
};

/// The backend body could not be parsed at all. Keeps the body for audit.
class MalformedOutput : public Error {
public:
    MalformedOutput(const std::string& why, std::string body)
        : Error("malformed backend output: " + why), body_(std::move(body)) {}
    const std::string& body() const noexcept { return body_; }

private:
    std::string body_;
};

class BackendError : public Error {
public:
    BackendError(int chunk_ordinal, int attempts, const std::string& why)
        : Error("chunk " + std::to_string(chunk_ordinal) + " failed after " + std::to_string(attempts) +
                " attempt(s): " + why),
          chunk_ordinal_(chunk_ordinal),
          attempts_(attempts) {}
    int chunk_ordinal() const noexcept { return chunk_ordinal_; }
    int attempts() const noexcept { return attempts_; }

private:
    int chunk_ordinal_;
    int attempts_;
};

class NoCandidateSpan : public Error {
public:
    NoCandidateSpan() : Error("fuzzy alignment window is empty") {}
};

/// Serialized input does not conform to the expected document shape.
class SchemaViolation : public Error {
public:
    SchemaViolation(std::string location, const std::string& why)
        : Error(location + ": " + why), location_(std::move(location)) {}
    const std::string& location() const noexcept { return location_; }

private:
    std::string location_;
};

class CyclicGraph : public Error {
public:
    explicit CyclicGraph(std::vector<std::string> vertices);
    const std::vector<std::string>& vertices() const noexcept { return vertices_; }

private:
    std::vector<std::string> vertices_;
};

class EmptyEvaluation : public Error {
public:
    EmptyEvaluation() : Error("nothing to evaluate: both extracted and ground-truth sets are empty") {}
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace opsgraph
