#pragma once

// =============================================================================
// Steady-state input/output loop geometry
// =============================================================================
// A loop is a ring of (u, x) points; the edge from the last point back to the
// first is implicit. All metrics treat it as a closed polygon.
// =============================================================================

#include "hysteresis/expr.hpp"
#include "hysteresis/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace hysteresis {

struct Point {
    double u = 0.0;
    double x = 0.0;

    friend bool operator==(const Point& a, const Point& b) noexcept { return a.u == b.u && a.x == b.x; }
};

// =============================================================================
// Exact orientation
// =============================================================================

namespace geom {

/// a + b = s + e exactly.
inline void two_sum(double a, double b, double& s, double& e) noexcept {
    s = a + b;
    const double bv = s - a;
    const double av = s - bv;
    e = (a - av) + (b - bv);
}

/// a * b = p + e exactly (relies on a correctly rounded fma).
inline void two_product(double a, double b, double& p, double& e) noexcept {
    p = a * b;
    e = std::fma(a, b, -p);
}

/// Sign of the exact value of det[[bx - ax, cx - ax], [by - ay, cy - ay]],
/// computed as an exact floating-point expansion of six products.
inline int orient2d_sign(const Point& a, const Point& b, const Point& c) noexcept {
    const double approx = (b.u - a.u) * (c.x - a.x) - (b.x - a.x) * (c.u - a.u);
    const double mag = std::fabs((b.u - a.u) * (c.x - a.x)) + std::fabs((b.x - a.x) * (c.u - a.u));
    if (std::fabs(approx) > 1e-14 * mag && std::isfinite(approx)) return approx > 0.0 ? 1 : -1;

    // bu*cx - bu*ax - au*cx - bx*cu + bx*au + ax*cu
    const double terms[6][2] = {{b.u, c.x}, {-b.u, a.x}, {-a.u, c.x}, {-b.x, c.u}, {b.x, a.u}, {a.x, c.u}};
    double expansion[24];
    int len = 0;
    auto grow = [&](double value) {
        double q = value;
        int out = 0;
        for (int i = 0; i < len; ++i) {
            double s = 0.0;
            double e = 0.0;
            two_sum(q, expansion[i], s, e);
            if (e != 0.0) expansion[out++] = e;
            q = s;
        }
        if (q != 0.0) expansion[out++] = q;
        len = out;
    };
    for (const auto& t : terms) {
        double p = 0.0;
        double e = 0.0;
        two_product(t[0], t[1], p, e);
        if (e != 0.0) grow(e);
        if (p != 0.0) grow(p);
    }
    if (len == 0) return 0;
    return expansion[len - 1] > 0.0 ? 1 : -1;
}

inline double orient2d(const Point& a, const Point& b, const Point& c) noexcept {
    return (b.u - a.u) * (c.x - a.x) - (b.x - a.x) * (c.u - a.u);
}

/// Proper crossing of segments ab and cd (interiors cross at one point).
inline bool transverse(const Point& a, const Point& b, const Point& c, const Point& d, Point* at = nullptr) {
    const int o1 = orient2d_sign(a, b, c);
    const int o2 = orient2d_sign(a, b, d);
    if (o1 == 0 || o2 == 0 || o1 == o2) return false;
    const int o3 = orient2d_sign(c, d, a);
    const int o4 = orient2d_sign(c, d, b);
    if (o3 == 0 || o4 == 0 || o3 == o4) return false;
    if (at != nullptr) {
        const double s = orient2d(c, d, a) / (orient2d(c, d, a) - orient2d(c, d, b));
        *at = {a.u + s * (b.u - a.u), a.x + s * (b.x - a.x)};
    }
    return true;
}

/// Parameter along ab of its crossing with cd (call only when transverse).
inline double crossing_parameter(const Point& a, const Point& b, const Point& c, const Point& d) {
    const double da = orient2d(c, d, a);
    const double db = orient2d(c, d, b);
    return da / (da - db);
}

inline double shoelace(const std::vector<Point>& ring) {
    const std::size_t n = ring.size();
    if (n < 3) return 0.0;
    // Shifting to the first point keeps the sum well conditioned.
    const Point o = ring[0];
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = ring[i];
        const Point& q = ring[(i + 1) % n];
        sum += (p.u - o.u) * (q.x - o.x) - (q.u - o.u) * (p.x - o.x);
    }
    return 0.5 * sum;
}

inline std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.u != b.u ? a.u < b.u : a.x < b.x; });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (const Point& p : pts) {
        while (k >= 2 && orient2d_sign(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = pts.size() - 1; i-- > 0;) {
        while (k >= lower && orient2d_sign(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

inline double diameter(const std::vector<Point>& pts) {
    const std::vector<Point> hull = convex_hull(pts);
    double best = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        for (std::size_t j = i + 1; j < hull.size(); ++j) {
            best = std::max(best, std::hypot(hull[i].u - hull[j].u, hull[i].x - hull[j].x));
        }
    }
    return best;
}

}  // namespace geom

// =============================================================================
// Areas and self-intersections
// =============================================================================

struct LoopArea {
    double signed_area = 0.0;
    double geometric_area = 0.0;
};

/// Shoelace area (positive for counter-clockwise) and the total area of
/// the simple sub-loops obtained by cutting the ring at self-crossings.
[[nodiscard]] inline LoopArea loop_area(const std::vector<Point>& ring) {
    LoopArea out;
    if (ring.size() < 3) return out;
    out.signed_area = geom::shoelace(ring);

    // Loop erasure: walk the ring; whenever the new edge crosses the kept
    // path, the enclosed part is a simple sub-loop and is cut off.
    std::vector<Point> path{ring[0]};
    const std::size_t n = ring.size();
    for (std::size_t k = 1; k <= n; ++k) {
        const Point target = ring[k % n];
        const bool closing = k == n;
        Point cur = path.back();
        for (;;) {
            std::size_t best_j = path.size();
            double best_s = 2.0;
            Point best_at;
            // Skip the last kept edge (it ends at cur) and, on the closing
            // edge, the first kept edge (it starts at the target).
            const std::size_t first = closing ? 1 : 0;
            const double ulo = std::min(cur.u, target.u), uhi = std::max(cur.u, target.u);
            const double xlo = std::min(cur.x, target.x), xhi = std::max(cur.x, target.x);
            for (std::size_t j = first; j + 2 < path.size(); ++j) {
                const Point& c = path[j];
                const Point& d = path[j + 1];
                if (std::max(c.u, d.u) < ulo || std::min(c.u, d.u) > uhi || std::max(c.x, d.x) < xlo ||
                    std::min(c.x, d.x) > xhi) {
                    continue;
                }
                Point at;
                if (geom::transverse(cur, target, path[j], path[j + 1], &at)) {
                    const double s = geom::crossing_parameter(cur, target, path[j], path[j + 1]);
                    if (s < best_s) {
                        best_s = s;
                        best_j = j;
                        best_at = at;
                    }
                }
            }
            if (best_j == path.size()) break;
            std::vector<Point> sub{best_at};
            sub.insert(sub.end(), path.begin() + static_cast<std::ptrdiff_t>(best_j) + 1, path.end());
            out.geometric_area += std::fabs(geom::shoelace(sub));
            path.resize(best_j + 1);
            path.push_back(best_at);
            cur = best_at;
        }
        if (!closing) path.push_back(target);
    }
    out.geometric_area += std::fabs(geom::shoelace(path));
    return out;
}

/// All transverse crossings between non-adjacent edges of the ring.
[[nodiscard]] inline std::vector<Point> detect_pinch(const std::vector<Point>& ring) {
    std::vector<Point> hits;
    const std::size_t n = ring.size();
    if (n < 4) return hits;
    struct Edge {
        std::size_t i;
        double lo;
        double hi;
    };
    std::vector<Edge> edges(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = ring[i];
        const Point& b = ring[(i + 1) % n];
        edges[i] = {i, std::min(a.u, b.u), std::max(a.u, b.u)};
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.lo != b.lo ? a.lo < b.lo : a.i < b.i; });
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n && edges[q].lo <= edges[p].hi; ++q) {
            const std::size_t i = std::min(edges[p].i, edges[q].i);
            const std::size_t j = std::max(edges[p].i, edges[q].i);
            if (j - i <= 1 || j - i == n - 1) continue;
            const Point &a = ring[i], &b = ring[(i + 1) % n], &c = ring[j], &d = ring[(j + 1) % n];
            if (std::max(a.x, b.x) < std::min(c.x, d.x) || std::max(c.x, d.x) < std::min(a.x, b.x)) continue;
            if (geom::transverse(a, b, c, d)) pairs.emplace_back(i, j);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    for (const auto& [i, j] : pairs) {
        Point at;
        geom::transverse(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n], &at);
        hits.push_back(at);
    }
    return hits;
}

// =============================================================================
// Jumps
// =============================================================================

struct JumpEvent {
    double u_at_jump = 0.0;
    double x_before = 0.0;
    double x_after = 0.0;
    double max_slope = 0.0;
};

struct JumpOptions {
    double slope_threshold = 10.0;
    double jump_height_fraction = 0.25;
};

/// Steep stretches of the ring. Runs of edges with |dx|/(|du| + 1e-9) above
/// the threshold are collected cyclically; consecutive runs in the same
/// direction merge when the edges between them keep moving x that way. A
/// run is kept when its net |dx| reaches the height fraction, and is located
/// where half of its accumulated |dx| has been covered.
[[nodiscard]] inline std::vector<JumpEvent> locate_jumps(const std::vector<Point>& ring, const JumpOptions& opts = {}) {
    std::vector<JumpEvent> jumps;
    const std::size_t n = ring.size();
    if (n < 3) return jumps;
    const auto [xmin_it, xmax_it] =
        std::minmax_element(ring.begin(), ring.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
    const double height = xmax_it->x - xmin_it->x;
    if (!(height > 0.0)) return jumps;

    auto dx = [&](std::size_t k) { return ring[(k + 1) % n].x - ring[k % n].x; };
    auto du = [&](std::size_t k) { return ring[(k + 1) % n].u - ring[k % n].u; };
    auto slope = [&](std::size_t k) { return std::fabs(dx(k)) / (std::fabs(du(k)) + 1e-9); };
    auto steep = [&](std::size_t k) { return slope(k) > opts.slope_threshold; };

    std::size_t start = n;
    for (std::size_t k = 0; k < n; ++k) {
        if (!steep(k)) {
            start = k;
            break;
        }
    }
    if (start == n) return jumps;

    struct Run {
        std::size_t begin;  // first edge (offset from start)
        std::size_t end;    // one past last edge
        double net;
    };
    std::vector<Run> runs;
    for (std::size_t off = 0; off < n;) {
        if (!steep(start + off)) {
            ++off;
            continue;
        }
        std::size_t e = off;
        double net = 0.0;
        while (e < n && steep(start + e)) net += dx(start + e++);
        runs.push_back({off, e, net});
        off = e;
    }

    std::vector<Run> merged;
    for (const Run& r : runs) {
        if (!merged.empty() && r.net != 0.0 && (merged.back().net > 0.0) == (r.net > 0.0)) {
            Run& prev = merged.back();
            const bool up = prev.net > 0.0;
            bool monotone = true;
            double between = 0.0;
            for (std::size_t k = prev.end; k < r.begin && monotone; ++k) {
                const double d = dx(start + k);
                monotone = up ? d > 0.0 : d < 0.0;
                between += d;
            }
            if (monotone) {
                prev.net += between + r.net;
                prev.end = r.end;
                continue;
            }
        }
        merged.push_back(r);
    }

    for (const Run& r : merged) {
        if (std::fabs(r.net) < opts.jump_height_fraction * height) continue;
        double mass = 0.0;
        double max_slope = 0.0;
        for (std::size_t k = r.begin; k < r.end; ++k) {
            mass += std::fabs(dx(start + k));
            max_slope = std::max(max_slope, slope(start + k));
        }
        JumpEvent j;
        j.u_at_jump = ring[(start + r.begin) % n].u;
        double acc = 0.0;
        for (std::size_t k = r.begin; k < r.end; ++k) {
            const std::size_t e = start + k;
            const double w = std::fabs(dx(e));
            if (w > 0.0 && acc + w >= 0.5 * mass) {
                j.u_at_jump = ring[e % n].u + (0.5 * mass - acc) / w * du(e);
                break;
            }
            acc += w;
        }
        j.x_before = ring[(start + r.begin) % n].x;
        j.x_after = ring[(start + r.end) % n].x;
        j.max_slope = max_slope;
        jumps.push_back(j);
    }
    return jumps;
}

// =============================================================================
// Steady loop
// =============================================================================

struct LoopOptions {
    double closure_threshold = 0.02;
    JumpOptions jumps;
};

struct SteadyLoop {
    /// One input period of samples; the duplicate period-end sample is
    /// dropped so the ring closes implicitly.
    std::vector<Point> points;
    bool closed = false;
    bool unbounded_candidate = false;
    double closure_gap = 0.0;
    double signed_area = 0.0;
    double geometric_area = 0.0;
    double diameter = 0.0;
    std::vector<Point> pinch_points;
    std::vector<JumpEvent> jumps;

    [[nodiscard]] bool degenerate() const noexcept { return diameter == 0.0; }
};

/// Computes every metric of a ring. `closure_gap` is supplied by the caller
/// (the distance between the period's first and last samples over the
/// diameter); pass a negative value to measure it on the ring itself.
[[nodiscard]] inline SteadyLoop analyze_ring(std::vector<Point> ring, double closure_gap = -1.0,
                                             const LoopOptions& opts = {}) {
    SteadyLoop loop;
    loop.diameter = ring.empty() ? 0.0 : geom::diameter(ring);
    if (closure_gap < 0.0) {
        closure_gap = ring.size() < 2 || loop.diameter == 0.0
                          ? 0.0
                          : std::hypot(ring.front().u - ring.back().u, ring.front().x - ring.back().x) / loop.diameter;
    }
    loop.closure_gap = closure_gap;
    loop.closed = closure_gap < opts.closure_threshold;
    const LoopArea area = loop_area(ring);
    loop.signed_area = area.signed_area;
    loop.geometric_area = area.geometric_area;
    loop.pinch_points = detect_pinch(ring);
    if (loop.closed) loop.jumps = locate_jumps(ring, opts.jumps);
    loop.points = std::move(ring);
    return loop;
}

/// The last `samples_per_period` steps of the curve. Requires at least
/// discard_periods + 1 full periods.
[[nodiscard]] inline SteadyLoop extract_steady_loop(const IoCurve& io, int samples_per_period, int discard_periods,
                                                    const LoopOptions& opts = {}) {
    if (samples_per_period < 1 || discard_periods < 0) throw Error("invalid loop extraction parameters");
    if (io.diverged) {
        SteadyLoop loop;
        loop.unbounded_candidate = true;
        loop.closure_gap = std::numeric_limits<double>::infinity();
        return loop;
    }
    const std::size_t spp = static_cast<std::size_t>(samples_per_period);
    const std::size_t need = (static_cast<std::size_t>(discard_periods) + 1) * spp + 1;
    if (io.size() < need) {
        throw Error("trajectory covers too few periods for loop extraction (" + std::to_string(io.size()) +
                    " samples, need " + std::to_string(need) + ")");
    }
    const std::size_t first = io.size() - spp - 1;
    std::vector<Point> ring;
    ring.reserve(spp);
    for (std::size_t i = first; i < first + spp; ++i) ring.push_back({io.u[i], io.x[i]});

    const Point last{io.u.back(), io.x.back()};
    std::vector<Point> with_end = ring;
    with_end.push_back(last);
    const double diam = geom::diameter(with_end);
    const double gap = diam > 0.0 ? std::hypot(last.u - ring.front().u, last.x - ring.front().x) / diam : 0.0;
    return analyze_ring(std::move(ring), gap, opts);
}

// =============================================================================
// Loop distance
// =============================================================================

struct LoopDistance {
    double distance = 0.0;
    double diameter_a = 0.0;
    double diameter_b = 0.0;

    /// distance over the larger of the two diameters (0 when both vanish).
    [[nodiscard]] double relative() const noexcept {
        const double d = std::max(diameter_a, diameter_b);
        return d > 0.0 ? distance / d : 0.0;
    }
};

namespace detail {

/// N points at equal arc-length spacing around the ring, starting from its
/// largest-u vertex. Zero-length rings collapse to their centroid.
inline std::vector<Point> resample_ring(const std::vector<Point>& ring, std::size_t count) {
    std::vector<Point> out(count);
    if (ring.empty()) return out;
    const std::size_t n = ring.size();
    std::vector<double> cumulative(n + 1, 0.0);
    const std::size_t origin = static_cast<std::size_t>(
        std::max_element(ring.begin(), ring.end(), [](const Point& a, const Point& b) { return a.u < b.u; }) -
        ring.begin());
    auto at = [&](std::size_t k) -> const Point& { return ring[(origin + k) % n]; };
    for (std::size_t k = 0; k < n; ++k) {
        cumulative[k + 1] = cumulative[k] + std::hypot(at(k + 1).u - at(k).u, at(k + 1).x - at(k).x);
    }
    const double total = cumulative[n];
    if (!(total > 0.0)) {
        Point c;
        for (const Point& p : ring) {
            c.u += p.u / n;
            c.x += p.x / n;
        }
        std::fill(out.begin(), out.end(), c);
        return out;
    }
    std::size_t seg = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const double s = total * static_cast<double>(i) / count;
        while (seg + 1 < n && cumulative[seg + 1] <= s) ++seg;
        const double len = cumulative[seg + 1] - cumulative[seg];
        const double w = len > 0.0 ? (s - cumulative[seg]) / len : 0.0;
        const Point& a = at(seg);
        const Point& b = at(seg + 1);
        out[i] = {a.u + w * (b.u - a.u), a.x + w * (b.x - a.x)};
    }
    return out;
}

}  // namespace detail

/// Root-mean-square distance between the two loops after arc-length
/// resampling to `samples` points from each loop's largest-u vertex.
[[nodiscard]] inline LoopDistance loop_distance(const std::vector<Point>& a, const std::vector<Point>& b,
                                                std::size_t samples = 512) {
    const std::vector<Point> ra = detail::resample_ring(a, samples);
    const std::vector<Point> rb = detail::resample_ring(b, samples);
    double sum = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double d = std::hypot(ra[i].u - rb[i].u, ra[i].x - rb[i].x);
        sum += d * d;
    }
    LoopDistance out;
    out.distance = std::sqrt(sum / static_cast<double>(samples));
    out.diameter_a = a.empty() ? 0.0 : geom::diameter(a);
    out.diameter_b = b.empty() ? 0.0 : geom::diameter(b);
    return out;
}

[[nodiscard]] inline LoopDistance loop_distance(const SteadyLoop& a, const SteadyLoop& b, std::size_t samples = 512) {
    return loop_distance(a.points, b.points, samples);
}

}  // namespace hysteresis
