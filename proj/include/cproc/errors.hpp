#pragma once
#include <stdexcept>
#include <string>

namespace cproc {

// Bad input: invalid graph, parameter out of range, malformed config.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An estimate that could not be resolved within its budget (CI straddles the
// decision threshold, conditioning event too rare, ...). Distinct from both
// success and failure so pipelines can treat it separately.
struct Inconclusive : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cproc
