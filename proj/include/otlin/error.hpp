#pragma once

#include <stdexcept>
#include <string>

namespace otlin {

enum class ErrorKind { InvalidInput, Numerical, Mesh, Gate, Extrapolation, Io, Usage };

/// Exception carrying an error category and an optional pipeline stage tag.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::string stage = {})
        : std::runtime_error(stage.empty() ? message : stage + ": " + message),
          kind_(kind), stage_(std::move(stage)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& stage() const noexcept { return stage_; }

private:
    ErrorKind kind_;
    std::string stage_;
};

const char* to_string(ErrorKind kind) noexcept;

} // namespace otlin
