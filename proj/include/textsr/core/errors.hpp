#pragma once

#include <stdexcept>
#include <string>

namespace textsr {

// Validation failures (bad shapes, bad parameters, bad prompts). CLI maps these to exit code 1.
struct ShapeError : std::invalid_argument {
    explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct ParamError : std::invalid_argument {
    explicit ParamError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct PromptError : std::invalid_argument {
    explicit PromptError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct DataError : std::invalid_argument {
    explicit DataError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Filesystem / encoding failures. CLI maps these to exit code 2.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace textsr
