#include "aoipomdp/report.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "aoipomdp/config.hpp"
#include "aoipomdp/policy_io.hpp"

namespace aoipomdp {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    return os;
}

void write_meta(std::ofstream& os, const ReportMeta& meta) {
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016" PRIx64, meta.config_hash);
    os << "# " << kToolVersion << "\n";
    os << "# config_hash " << hash << "\n";
    os << "# seed " << meta.seed << "\n";
    for (const auto& [key, value] : meta.extra)
        os << "# " << key << " " << value << "\n";
}

void write_vector_header(std::ofstream& os, const char* stem, int n) {
    for (int i = 0; i < n; ++i) os << ',' << stem << i;
}

void write_vector(std::ofstream& os, const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        os << ',' << format_double(v[i]);
}

// Fixed short float format for plot coordinates.
std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

void write_trace_csv(const std::string& path,
                     const std::vector<TraceRecord>& trace,
                     const ReportMeta& meta) {
    if (trace.empty()) throw std::invalid_argument("empty trace");
    std::ofstream os = open_out(path);
    write_meta(os, meta);
    const int n = static_cast<int>(trace.front().x.size());
    const int n_c = trace.front().belief.size();
    os << "k";
    write_vector_header(os, "x", n);
    write_vector_header(os, "xs", n);
    write_vector_header(os, "xr", n);
    os << ",action,ack,aoi";
    write_vector_header(os, "belief", n_c);
    os << ",channel,sq_err,stage_cost\n";
    for (const TraceRecord& rec : trace) {
        os << rec.k;
        write_vector(os, rec.x);
        write_vector(os, rec.x_hat_sensor);
        write_vector(os, rec.x_hat_remote);
        os << ',' << static_cast<int>(rec.action) << ','
           << static_cast<int>(rec.ack) << ',' << rec.aoi;
        write_vector(os, rec.belief.probs());
        os << ',' << rec.channel_true << ',' << format_double(rec.sq_err)
           << ',' << format_double(rec.stage_cost_incurred) << '\n';
    }
    if (!os) throw std::runtime_error("failed writing " + path);
}

void write_metrics_csv(const std::string& path, const Metrics& metrics,
                       const ReportMeta& meta) {
    std::ofstream os = open_out(path);
    write_meta(os, meta);
    os << "# mse_mean " << format_double(metrics.mse_mean) << "\n";
    os << "# mse_std " << format_double(metrics.mse_std) << "\n";
    os << "# mean_cost " << format_double(metrics.mean_cost) << "\n";
    os << "# ack_rate " << format_double(metrics.ack_rate) << "\n";
    os << "run,mse\n";
    for (size_t r = 0; r < metrics.per_run_mse.size(); ++r)
        os << r << ',' << format_double(metrics.per_run_mse[r]) << '\n';
    if (!os) throw std::runtime_error("failed writing " + path);
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepCurve>& curves,
                     const ReportMeta& meta) {
    std::ofstream os = open_out(path);
    write_meta(os, meta);
    os << "channel,lambda,mse_mean,mse_std,mean_cost,ack_rate\n";
    for (const SweepCurve& curve : curves)
        for (const SweepRow& row : curve.rows)
            os << curve.channel << ',' << format_double(row.lambda) << ','
               << format_double(row.metrics.mse_mean) << ','
               << format_double(row.metrics.mse_std) << ','
               << format_double(row.metrics.mean_cost) << ','
               << format_double(row.metrics.ack_rate) << '\n';
    if (!os) throw std::runtime_error("failed writing " + path);
}

void write_sweep_svg(const std::string& path,
                     const std::vector<SweepCurve>& curves) {
    if (curves.empty() || curves.front().rows.empty())
        throw std::invalid_argument("empty sweep");

    constexpr double W = 640, H = 420;
    constexpr double ML = 70, MR = 20, MT = 30, MB = 50;
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};

    double x_min = 1e300, x_max = -1e300, y_min = 0.0, y_max = -1e300;
    for (const SweepCurve& c : curves) {
        for (const SweepRow& r : c.rows) {
            x_min = std::min(x_min, r.lambda);
            x_max = std::max(x_max, r.lambda);
            y_max = std::max(y_max, r.metrics.mse_mean + r.metrics.mse_std);
        }
    }
    if (x_max <= x_min) {
        x_min -= 0.05;
        x_max += 0.05;
    }
    if (y_max <= y_min) y_max = y_min + 1.0;
    y_max *= 1.05;

    const auto px = [&](double x) {
        return ML + (x - x_min) / (x_max - x_min) * (W - ML - MR);
    };
    const auto py = [&](double y) {
        return H - MB - (y - y_min) / (y_max - y_min) * (H - MT - MB);
    };

    std::ofstream os = open_out(path);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
       << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H
       << "\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H
       << "\" fill=\"white\"/>\n";
    // axes
    os << "<line x1=\"" << svg_num(ML) << "\" y1=\"" << svg_num(H - MB)
       << "\" x2=\"" << svg_num(W - MR) << "\" y2=\"" << svg_num(H - MB)
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << svg_num(ML) << "\" y1=\"" << svg_num(MT)
       << "\" x2=\"" << svg_num(ML) << "\" y2=\"" << svg_num(H - MB)
       << "\" stroke=\"black\"/>\n";
    // ticks
    for (int t = 0; t <= 4; ++t) {
        const double xv = x_min + (x_max - x_min) * t / 4;
        const double yv = y_min + (y_max - y_min) * t / 4;
        os << "<line x1=\"" << svg_num(px(xv)) << "\" y1=\"" << svg_num(H - MB)
           << "\" x2=\"" << svg_num(px(xv)) << "\" y2=\""
           << svg_num(H - MB + 5) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << svg_num(px(xv)) << "\" y=\""
           << svg_num(H - MB + 20)
           << "\" font-size=\"12\" text-anchor=\"middle\">" << svg_num(xv)
           << "</text>\n";
        os << "<line x1=\"" << svg_num(ML - 5) << "\" y1=\"" << svg_num(py(yv))
           << "\" x2=\"" << svg_num(ML) << "\" y2=\"" << svg_num(py(yv))
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << svg_num(ML - 8) << "\" y=\""
           << svg_num(py(yv) + 4)
           << "\" font-size=\"12\" text-anchor=\"end\">" << svg_num(yv)
           << "</text>\n";
    }
    os << "<text x=\"" << svg_num((ML + W - MR) / 2) << "\" y=\""
       << svg_num(H - 12) << "\" font-size=\"13\" text-anchor=\"middle\">"
       << "lambda</text>\n";
    os << "<text x=\"16\" y=\"" << svg_num((MT + H - MB) / 2)
       << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << svg_num((MT + H - MB) / 2) << ")\">mean MSE</text>\n";

    for (size_t c = 0; c < curves.size(); ++c) {
        const char* color = kColors[c % (sizeof kColors / sizeof *kColors)];
        os << "<polyline fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.5\" points=\"";
        for (const SweepRow& r : curves[c].rows)
            os << svg_num(px(r.lambda)) << ',' << svg_num(py(r.metrics.mse_mean))
               << ' ';
        os << "\"/>\n";
        for (const SweepRow& r : curves[c].rows) {
            const double x = px(r.lambda);
            const double lo = py(r.metrics.mse_mean - r.metrics.mse_std);
            const double hi = py(r.metrics.mse_mean + r.metrics.mse_std);
            os << "<line x1=\"" << svg_num(x) << "\" y1=\"" << svg_num(lo)
               << "\" x2=\"" << svg_num(x) << "\" y2=\"" << svg_num(hi)
               << "\" stroke=\"" << color << "\"/>\n";
            os << "<circle cx=\"" << svg_num(x) << "\" cy=\""
               << svg_num(py(r.metrics.mse_mean)) << "\" r=\"2.5\" fill=\""
               << color << "\"/>\n";
        }
        os << "<text x=\"" << svg_num(W - MR - 10) << "\" y=\""
           << svg_num(MT + 16 + 16 * static_cast<double>(c))
           << "\" font-size=\"12\" text-anchor=\"end\" fill=\"" << color
           << "\">" << curves[c].channel << "</text>\n";
    }
    os << "</svg>\n";
    if (!os) throw std::runtime_error("failed writing " + path);
}

}  // namespace aoipomdp
