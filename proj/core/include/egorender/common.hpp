#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ego {

// Thrown when a required on-disk artifact (dataset, checkpoint, config)
// is absent or unreadable. The CLI maps this to exit code 3.
struct MissingArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a NaN/Inf is detected where finite values are required.
// The CLI maps this to exit code 4.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool deterministic_mode() {
    const char* v = std::getenv("EGORENDER_DETERMINISTIC");
    return v != nullptr && std::string(v) != "0";
}

}  // namespace ego
