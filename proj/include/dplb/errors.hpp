#pragma once

#include <stdexcept>
#include <string>

namespace dplb {

// Invalid parameters, malformed inputs, unusable paths. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Well-formed artifacts that contradict each other (e.g. a code secret whose
// dummy marks don't match the codebook). CLI exit code 3.
class IntegrityError : public std::runtime_error {
public:
    explicit IntegrityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dplb
