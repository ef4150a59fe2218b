#pragma once

#include <stdexcept>
#include <string>

namespace ontask {

// Error classes align with the status codes of the C API (see include/ontask.h).
enum class ErrorCode {
    config = 2,
    io = 3,
    invalid_argument = 4,
    insufficient_data = 5,
    no_convergence = 6,
    degenerate = 7,
    unsupported = 8,
    internal = 9,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, std::string message) {
    throw Error(code, std::move(message));
}

}  // namespace ontask
