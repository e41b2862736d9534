#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace holo {

// Base for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input text (literal strings, expression DSL). Carries a byte
// offset into the offending string.
class ParseError : public Error {
public:
    ParseError(std::size_t pos, const std::string& msg)
        : Error("parse error at " + std::to_string(pos) + ": " + msg), pos_(pos) {}
    std::size_t pos() const { return pos_; }

private:
    std::size_t pos_;
};

// Structurally valid input that violates a semantic rule. Collects every
// offending item so callers can report them all at once.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> issues)
        : Error(join(issues)), issues_(std::move(issues)) {}
    const std::vector<std::string>& issues() const { return issues_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "validation failed";
        for (const auto& i : v) {
            s += "\n  - " + i;
        }
        return s;
    }
    std::vector<std::string> issues_;
};

// A known attribute value was contradicted beyond tolerance.
class ConflictError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace holo
