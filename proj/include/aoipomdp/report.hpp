#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aoipomdp/sim.hpp"

namespace aoipomdp {

/// Comment-header metadata stamped into every output file. Deliberately
/// contains no timestamps so reruns are byte-identical.
struct ReportMeta {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> extra;
};

/// Trace CSV: one row per slot, vector fields expanded to one column per
/// coordinate, '#' metadata lines before the header row.
void write_trace_csv(const std::string& path,
                     const std::vector<TraceRecord>& trace,
                     const ReportMeta& meta);

/// Per-run metrics CSV with the aggregates in the metadata header.
void write_metrics_csv(const std::string& path, const Metrics& metrics,
                       const ReportMeta& meta);

/// One sweep curve: a named channel matrix and its per-lambda rows.
struct SweepCurve {
    std::string channel;
    std::vector<SweepRow> rows;
};

/// Sweep CSV: one row per (channel, lambda).
void write_sweep_csv(const std::string& path,
                     const std::vector<SweepCurve>& curves,
                     const ReportMeta& meta);

/// Self-contained SVG line chart of the sweep: lambda on the x axis, mean
/// MSE on the y axis, one polyline per channel with +-std whiskers.
void write_sweep_svg(const std::string& path,
                     const std::vector<SweepCurve>& curves);

}  // namespace aoipomdp
