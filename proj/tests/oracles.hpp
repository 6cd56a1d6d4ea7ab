#pragma once

// Test-only oracles, independent of the library's half-angle solution path.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "fourbar/kinematics.hpp"
#include "fourbar/rng.hpp"

namespace oracle {

using fourbar::LinkageDims;

// Output angle by direct circle-circle intersection: the coupler-output joint
// lies on circle(center = input-coupler joint, radius r3) and
// circle(center = output pivot, radius r4). branch +1 selects the
// intersection on the CCW side of the ray from the output pivot towards the
// input-coupler joint (cross product > 0), matching the library's labeling.
inline std::optional<double> circle_intersection_output(const LinkageDims& r, double theta_in,
                                                        int branch) {
    const double ax = r.r2 * std::cos(theta_in);
    const double ay = r.r2 * std::sin(theta_in);
    const double cx = r.r1, cy = 0.0;
    const double d = std::hypot(cx - ax, cy - ay);
    if (d > r.r3 + r.r4 || d < std::abs(r.r3 - r.r4)) return std::nullopt;
    if (d == 0.0) return std::nullopt;

    const double a = (r.r3 * r.r3 - r.r4 * r.r4 + d * d) / (2.0 * d);
    const double h2 = r.r3 * r.r3 - a * a;
    const double h = std::sqrt(std::max(0.0, h2));
    const double px = ax + a * (cx - ax) / d;
    const double py = ay + a * (cy - ay) / d;

    const double ox = (cy - ay) / d, oy = -(cx - ax) / d; // perpendicular offset direction
    const double b1x = px + h * ox, b1y = py + h * oy;
    const double b2x = px - h * ox, b2y = py - h * oy;

    auto cross_from_pivot = [&](double bx, double by) {
        return (ax - cx) * (by - cy) - (ay - cy) * (bx - cx);
    };
    const bool first_is_ccw = cross_from_pivot(b1x, b1y) > 0.0;
    const bool want_ccw = branch > 0;
    const double bx = (first_is_ccw == want_ccw) ? b1x : b2x;
    const double by = (first_is_ccw == want_ccw) ? b1y : b2y;
    return std::atan2(by - cy, bx - cx);
}

// Assembly is possible iff the pivot distance fits between the coupler and
// output link lengths (triangle inequality), with no half-angle algebra.
inline bool geometric_reachable(const LinkageDims& r, double theta_in) {
    const double ax = r.r2 * std::cos(theta_in);
    const double ay = r.r2 * std::sin(theta_in);
    const double d = std::hypot(r.r1 - ax, ay);
    return d <= r.r3 + r.r4 && d >= std::abs(r.r3 - r.r4);
}

struct SweepRange {
    bool full = false;
    double lo = 0, hi = 0; // contiguous reachable arc, hi may exceed pi
};

// Dense reachability sweep over [-pi, pi) with bisection refinement. Of a
// symmetric arc pair the non-negative one is reported, mirroring the library.
inline SweepRange sweep_input_range(const LinkageDims& r, int steps = 8192) {
    const double h = fourbar::kTwoPi / steps;
    std::array<double, 4> zeros{};
    int nz = 0;
    bool prev = geometric_reachable(r, -fourbar::kPi);
    const bool wrap_reachable = prev;
    for (int i = 1; i <= steps && nz < 4; ++i) {
        const double th = -fourbar::kPi + i * h;
        const bool cur = geometric_reachable(r, th);
        if (cur != prev) {
            double lo = th - h, hi = th;
            bool flo = prev;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (geometric_reachable(r, mid) == flo) lo = mid;
                else hi = mid;
            }
            zeros[nz++] = 0.5 * (lo + hi);
        }
        prev = cur;
    }
    SweepRange out;
    if (nz == 0) {
        out.full = true;
        return out;
    }
    if (nz == 2) {
        if (!wrap_reachable) {
            out.lo = zeros[0];
            out.hi = zeros[1];
        } else { // arc through pi
            out.lo = zeros[1];
            out.hi = zeros[0] + fourbar::kTwoPi;
        }
    } else if (nz == 4) {
        out.lo = zeros[2];
        out.hi = zeros[3];
    } else {
        throw std::logic_error("sweep_input_range: odd transition count");
    }
    return out;
}

// Plain Gaussian elimination with partial pivoting, for checking the
// quarter-M^T inverse against a direct linear solve.
inline std::array<double, 4> gauss_solve4(std::array<std::array<double, 4>, 4> m,
                                          std::array<double, 4> b) {
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int i = col + 1; i < 4; ++i)
            if (std::abs(m[i][col]) > std::abs(m[piv][col])) piv = i;
        std::swap(m[col], m[piv]);
        std::swap(b[col], b[piv]);
        for (int i = col + 1; i < 4; ++i) {
            const double f = m[i][col] / m[col][col];
            for (int j = col; j < 4; ++j) m[i][j] -= f * m[col][j];
            b[i] -= f * b[col];
        }
    }
    std::array<double, 4> x{};
    for (int i = 3; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < 4; ++j) s -= m[i][j] * x[j];
        x[i] = s / m[i][i];
    }
    return x;
}

// Uniform random valid linkage of no particular type.
inline LinkageDims random_valid_dims(fourbar::Rng& rng, double lo = 0.2, double hi = 5.0) {
    for (;;) {
        LinkageDims r{rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi),
                      rng.uniform(lo, hi)};
        if (r.is_valid()) return r;
    }
}

} // namespace oracle
