#include "kof/errors.hpp"

namespace kof {

FormatError::FormatError(const std::string& message, std::size_t line)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

}  // namespace kof
