#pragma once

#include <stdexcept>
#include <string>

namespace jic {

// Bad caller input: violated preconditions, out-of-range parameters.
class ArgumentError : public std::invalid_argument {
public:
    explicit ArgumentError(const std::string& msg) : std::invalid_argument(msg) {}
};

// File/stream level failure. Always fatal for the operation that hit it.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Remote endpoint unreachable after the configured retry budget.
class TransportError : public std::runtime_error {
public:
    TransportError(const std::string& msg, int attempts_made)
        : std::runtime_error(msg + " (after " + std::to_string(attempts_made) + " attempts)"),
          attempts(attempts_made) {}
    int attempts;
};

// Backend answered but the completion body was empty.
class EmptyResponseError : public std::runtime_error {
public:
    explicit EmptyResponseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structured dialogue-parse failure; `rule` names the violated constraint
// and drives skip-and-retry bookkeeping.
class DialogueParseError : public std::runtime_error {
public:
    DialogueParseError(const std::string& rule_name, const std::string& msg)
        : std::runtime_error(msg), rule(rule_name) {}
    std::string rule;
};

// Stage orchestration failure: missing prerequisite, config-hash mismatch,
// locked workdir.
class PipelineError : public std::runtime_error {
public:
    explicit PipelineError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace jic
