#pragma once

namespace aoipomdp {

/// Execution mode for the data-parallel kernels (value backups, Monte Carlo
/// episodes). Both modes produce bit-identical results; the serial path is
/// kept as the reference implementation for tests and benchmarks.
enum class Exec {
    serial,
    parallel,
};

/// Worker count for the OpenMP kernels: the OpenMP default, capped by the
/// AOI_POMDP_THREADS environment variable when it is set to a positive
/// integer.
int worker_count();

}  // namespace aoipomdp
