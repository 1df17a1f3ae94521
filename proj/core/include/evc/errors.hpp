#pragma once

#include <stdexcept>
#include <string>

namespace evc {

// Shape or size disagreement between operands.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Malformed container header (IDX magic, checkpoint magic).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Payload shorter or longer than its header declares.
class LengthError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Checkpoint could not be decoded; field() names the failing field.
class CheckpointError : public std::runtime_error {
public:
    CheckpointError(std::string field, const std::string& what)
        : std::runtime_error("checkpoint field '" + field + "': " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace evc
