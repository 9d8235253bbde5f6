#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "aoipomdp/solver.hpp"

namespace aoipomdp {

/// Loaded artifact does not belong to the model at hand (hash or shape
/// mismatch). Mapped to its own process exit code by the CLI.
class ArtifactMismatch : public std::runtime_error {
public:
    explicit ArtifactMismatch(const std::string& what)
        : std::runtime_error(what) {}
};

/// Shape and provenance of a solved artifact. The model hash fingerprints the
/// system/channel/cost/solver configuration the artifact was produced from.
struct ArtifactHeader {
    int n_c = 0;
    int n_r = 0;
    int horizon = 0;
    int resolution = 0;
    std::uint64_t model_hash = 0;
};

/// FNV-1a 64-bit hash of a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

/// Shortest round-trip decimal rendering of a double ("%.17g", C locale).
std::string format_double(double v);

/// Writes/reads a policy as versioned decimal text: a fixed header followed
/// by the action array in (stage, grid point, aoi) row-major order.
void save_policy(const std::string& path, const ArtifactHeader& header,
                 const Policy& policy);
Policy load_policy(const std::string& path, ArtifactHeader* header_out);

/// Same scheme for the value table (horizon+1 layers).
void save_values(const std::string& path, const ArtifactHeader& header,
                 const ValueTable& table);
ValueTable load_values(const std::string& path, ArtifactHeader* header_out);

}  // namespace aoipomdp
