#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mascara {

// Base of every error caused by bad input, configuration, or environment.
// The CLI maps these to exit code 1; anything else is an internal error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DecodeError : public Error {
public:
    DecodeError(const std::string& what, std::size_t byte_offset)
        : Error(what + " at byte offset " + std::to_string(byte_offset)), offset_(byte_offset) {}

    std::size_t byte_offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class OovError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

class LoadError : public Error {
public:
    LoadError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    GenerationError(const std::string& what, std::size_t restarts)
        : Error(what), restarts_(restarts) {}

    std::size_t restarts() const noexcept { return restarts_; }

private:
    std::size_t restarts_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace mascara
