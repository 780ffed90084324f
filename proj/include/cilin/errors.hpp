#ifndef CILIN_ERRORS_HPP
#define CILIN_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cilin {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file or stream. `line` is 1-based, 0 when not applicable.
class LoadError : public Error {
public:
    LoadError(const std::string& message, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class OovError : public Error {
public:
    explicit OovError(std::string token)
        : Error("out-of-vocabulary token: " + token), token_(std::move(token)) {}
    const std::string& token() const { return token_; }

private:
    std::string token_;
};

class UnencodableError : public Error {
public:
    explicit UnencodableError(std::vector<std::string> tokens);
    const std::vector<std::string>& tokens() const { return tokens_; }

private:
    std::vector<std::string> tokens_;
};

class UndefinedSimilarityError : public Error {
public:
    UndefinedSimilarityError() : Error("cosine undefined for zero-norm vector") {}
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

// Store-level referential or structural violation; `record` names the offender.
class IntegrityError : public Error {
public:
    IntegrityError(const std::string& message, std::string record = {})
        : Error(record.empty() ? message : message + ": " + record), record_(std::move(record)) {}
    const std::string& record() const { return record_; }

private:
    std::string record_;
};

} // namespace cilin

#endif
