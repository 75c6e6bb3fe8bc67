#pragma once

// CSV and SVG emission, CSV ingestion, atomic file writes.

#include "hysteresis/equilibrium.hpp"
#include "hysteresis/expr.hpp"
#include "hysteresis/integrator.hpp"
#include "hysteresis/loop.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace hysteresis {

/// File system failure (exit code 3 in the CLI).
class IoError : public Error {
public:
    using Error::Error;
};

// =============================================================================
// Formatting
// =============================================================================

/// 17 significant digits: every double round-trips exactly.
[[nodiscard]] inline std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void csv_row(std::string& out, std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) out += ',';
        out += csv_number(v);
        first = false;
    }
    out += '\n';
}

}  // namespace detail

/// Header `t,u,du,x1[,x2]`.
[[nodiscard]] inline std::string trajectory_csv(const Trajectory& traj) {
    std::string out = traj.order == 2 ? "t,u,du,x1,x2\n" : "t,u,du,x1\n";
    out.reserve(traj.size() * 96);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& in = traj.inputs[i];
        const auto& s = traj.states[i];
        if (traj.order == 2) {
            detail::csv_row(out, {traj.times[i], in.u, in.du, s[0], s[1]});
        } else {
            detail::csv_row(out, {traj.times[i], in.u, in.du, s[0]});
        }
    }
    return out;
}

[[nodiscard]] inline std::string io_curve_csv(const IoCurve& io) {
    std::string out = "u,x\n";
    for (std::size_t i = 0; i < io.size(); ++i) detail::csv_row(out, {io.u[i], io.x[i]});
    return out;
}

[[nodiscard]] inline std::string loop_csv(const std::vector<Point>& ring) {
    std::string out = "u,x\n";
    for (const Point& p : ring) detail::csv_row(out, {p.u, p.x});
    return out;
}

/// Header `U,x1[,x2],stability,fx_or_eig_re1,eig_re2`.
[[nodiscard]] inline std::string equilibria_csv(const EquilibriumReport& r) {
    std::string out = r.order == 2 ? "U,x1,x2,stability,fx_or_eig_re1,eig_re2\n" : "U,x1,stability,fx_or_eig_re1,eig_re2\n";
    for (const auto& e : r.equilibria) {
        out += csv_number(r.U) + ',' + csv_number(e.state[0]) + ',';
        if (r.order == 2) out += csv_number(e.state[1]) + ',';
        out += std::string(stability_name(e.stability)) + ',';
        if (r.order == 2) {
            out += csv_number(e.eig1.real()) + ',' + csv_number(e.eig2.real()) + '\n';
        } else {
            out += csv_number(e.fx) + ",\n";
        }
    }
    return out;
}

[[nodiscard]] inline std::string bifurcations_csv(const BifurcationSet& set) {
    std::string out = "U,x,residual_f,residual_fx\n";
    for (const auto& p : set.points) detail::csv_row(out, {p.U, p.x, p.residual_f, p.residual_fx});
    return out;
}

[[nodiscard]] inline std::string diagram_csv(const BifurcationDiagram& d) {
    std::string out = "U,x,stability\n";
    for (const auto& row : d.rows) {
        out += csv_number(row.U) + ',' + csv_number(row.x) + ',' + std::string(stability_name(row.stability)) + '\n';
    }
    return out;
}

// =============================================================================
// Ingestion
// =============================================================================

/// Reads a two-column `u,x` CSV (header required) back into a ring.
[[nodiscard]] inline std::vector<Point> parse_loop_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error("loop CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "u,x") throw Error("loop CSV must start with the header 'u,x'");
    std::vector<Point> ring;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error("loop CSV line " + std::to_string(lineno) + ": expected 'u,x'");
        const std::string a = line.substr(0, comma);
        const std::string b = line.substr(comma + 1);
        char* end = nullptr;
        errno = 0;
        const double u = std::strtod(a.c_str(), &end);
        const bool ok_u = end != a.c_str() && *end == '\0';
        const double x = std::strtod(b.c_str(), &end);
        const bool ok_x = end != b.c_str() && *end == '\0';
        if (!ok_u || !ok_x) throw Error("loop CSV line " + std::to_string(lineno) + ": malformed number");
        ring.push_back({u, x});
    }
    return ring;
}

// =============================================================================
// Files
// =============================================================================

[[nodiscard]] inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading '" + path.string() + "'");
    return ss.str();
}

/// Writes via a sibling temporary file and rename, so readers never see a
/// partially written file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("error writing '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
    }
}

// =============================================================================
// SVG
// =============================================================================

/// Minimal SVG 1.1 plot of a closed (u, x) polyline with axes and labels.
[[nodiscard]] inline std::string loop_svg(const std::vector<Point>& ring, const std::string& title) {
    constexpr double width = 480.0;
    constexpr double height = 400.0;
    constexpr double margin = 56.0;
    double umin = 0.0, umax = 1.0, xmin = 0.0, xmax = 1.0;
    if (!ring.empty()) {
        umin = umax = ring.front().u;
        xmin = xmax = ring.front().x;
        for (const Point& p : ring) {
            umin = std::min(umin, p.u);
            umax = std::max(umax, p.u);
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
        }
    }
    auto widen = [](double& lo, double& hi) {
        if (hi - lo <= 0.0) {
            const double pad = std::max(1.0, std::fabs(lo)) * 0.5;
            lo -= pad;
            hi += pad;
        }
    };
    widen(umin, umax);
    widen(xmin, xmax);
    const double pw = width - 2.0 * margin;
    const double ph = height - 2.0 * margin;
    auto sx = [&](double u) { return margin + (u - umin) / (umax - umin) * pw; };
    auto sy = [&](double x) { return height - margin - (x - xmin) / (xmax - xmin) * ph; };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return std::string(buf);
    };
    auto esc = [](const std::string& s) {
        std::string out;
        for (char c : s) {
            switch (c) {
                case '<': out += "&lt;"; break;
                case '>': out += "&gt;"; break;
                case '&': out += "&amp;"; break;
                case '"': out += "&quot;"; break;
                default: out += c;
            }
        }
        return out;
    };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width) + "\" height=\"" +
           num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + num(width / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">" + esc(title) + "</text>\n";
    svg += "<rect x=\"" + num(margin) + "\" y=\"" + num(margin) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(width / 2) + "\" y=\"" + num(height - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">u</text>\n";
    svg += "<text x=\"16\" y=\"" + num(height / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">x</text>\n";
    const std::string tick = "font-family=\"sans-serif\" font-size=\"10\"";
    svg += "<text x=\"" + num(margin) + "\" y=\"" + num(height - margin + 14) + "\" text-anchor=\"start\" " + tick +
           ">" + num(umin) + "</text>\n";
    svg += "<text x=\"" + num(width - margin) + "\" y=\"" + num(height - margin + 14) + "\" text-anchor=\"end\" " +
           tick + ">" + num(umax) + "</text>\n";
    svg += "<text x=\"" + num(margin - 4) + "\" y=\"" + num(height - margin) + "\" text-anchor=\"end\" " + tick + ">" +
           num(xmin) + "</text>\n";
    svg += "<text x=\"" + num(margin - 4) + "\" y=\"" + num(margin + 8) + "\" text-anchor=\"end\" " + tick + ">" +
           num(xmax) + "</text>\n";
    if (!ring.empty()) {
        svg += "<polygon fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < ring.size(); ++i) {
            if (i > 0) svg += ' ';
            svg += num(sx(ring[i].u)) + ',' + num(sy(ring[i].x));
        }
        svg += "\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace hysteresis
