#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace emuprob {

// Every failure raised by the library derives from Error. kind() is the
// stable, machine-readable tag the CLI prints on its reason line.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual const char* kind() const noexcept = 0;
};

// Argument outside the operation's domain (unknown state, bad length, ...).
class DomainError : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "domain"; }
};

// A documented precondition on the computer set or universe does not hold.
class ContractError : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "contract"; }
};

// The 2^n enumeration guard or a construction size cap was exceeded.
class ResourceError : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "resource"; }
};

class UnsupportedError : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "unsupported"; }
};

// A consistency check inside the library failed; indicates a bug.
class InternalError : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "internal"; }
};

class ParseError : public Error {
public:
    ParseError(std::string message, std::size_t line = 0)
        : Error(line == 0 ? message : "line " + std::to_string(line) + ": " + message),
          line_(line) {}
    [[nodiscard]] const char* kind() const noexcept override { return "parse"; }
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Carries every violated constraint, not just the first one.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> violations)
        : Error(join(violations)), violations_(std::move(violations)) {}
    [[nodiscard]] const char* kind() const noexcept override { return "validation"; }
    [[nodiscard]] const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string text;
        for (const auto& item : items) {
            if (!text.empty()) text += "; ";
            text += item;
        }
        return text;
    }

    std::vector<std::string> violations_;
};

} // namespace emuprob
