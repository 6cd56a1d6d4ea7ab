#include "fourbar/kinematics.hpp"

#include <cmath>
#include <stdexcept>

namespace fourbar {

bool LinkageDims::is_valid() const {
    const double s = sum();
    for (double v : as_array()) {
        if (!(v > 0.0)) return false;
        if (!(2.0 * v < s)) return false;
    }
    return true;
}

TParams t_params(const LinkageDims& r) {
    return {
        r.r1 - r.r2 + r.r3 - r.r4,
        r.r1 - r.r2 - r.r3 + r.r4,
        -r.r1 - r.r2 + r.r3 + r.r4,
        r.r1 + r.r2 + r.r3 + r.r4,
    };
}

LinkageDims dims_from_t(const TParams& t) {
    return {
        0.25 * (t.t1 + t.t2 - t.t3 + t.t4),
        0.25 * (-t.t1 - t.t2 - t.t3 + t.t4),
        0.25 * (t.t1 - t.t2 + t.t3 + t.t4),
        0.25 * (-t.t1 + t.t2 + t.t3 + t.t4),
    };
}

namespace {

// Row k = sign triple of type k+1.
constexpr int kSignTable[8][3] = {
    {+1, +1, +1}, // 1 crank-rocker
    {+1, -1, -1}, // 2 rocker-crank
    {-1, -1, +1}, // 3 double-crank
    {-1, +1, -1}, // 4 double-rocker
    {-1, -1, -1}, // 5 triple-rocker 00
    {+1, +1, -1}, // 6 triple-rocker 0pi
    {+1, -1, +1}, // 7 triple-rocker pi0
    {-1, +1, +1}, // 8 triple-rocker pipi
};

const char* kTypeNames[8] = {
    "Crank Rocker",     "Rocker Crank",      "Double Crank",      "Double Rocker",
    "Triple Rocker 00", "Triple Rocker 0pi", "Triple Rocker pi0", "Triple Rocker pipi",
};

} // namespace

std::array<int, 3> type_sign_triple(int type_id) {
    if (type_id < 1 || type_id > 8) throw std::out_of_range("type_id must be 1..8");
    const int* s = kSignTable[type_id - 1];
    return {s[0], s[1], s[2]};
}

int type_from_signs(int s1, int s2, int s3) {
    for (int k = 0; k < 8; ++k) {
        if (kSignTable[k][0] == s1 && kSignTable[k][1] == s2 && kSignTable[k][2] == s3)
            return k + 1;
    }
    throw std::invalid_argument("signs must each be +1 or -1");
}

std::string type_name(int type_id) {
    if (type_id < 1 || type_id > 8) throw std::out_of_range("type_id must be 1..8");
    return kTypeNames[type_id - 1];
}

std::string config_name(const TypeConfig& cfg) {
    return type_name(cfg.type_id) + (cfg.inversion == Inversion::plus ? "+" : "-");
}

std::optional<int> classify(const LinkageDims& r, double fold_tol) {
    const TParams t = t_params(r);
    if (std::abs(t.t1) <= fold_tol || std::abs(t.t2) <= fold_tol || std::abs(t.t3) <= fold_tol)
        return std::nullopt;
    return type_from_signs(t.t1 > 0 ? 1 : -1, t.t2 > 0 ? 1 : -1, t.t3 > 0 ? 1 : -1);
}

namespace {

struct HalfAngleCoeffs {
    double a, b, c;
};

inline HalfAngleCoeffs coeffs(const LinkageDims& r, double theta_in) {
    const double ct = std::cos(theta_in);
    const double st = std::sin(theta_in);
    return {
        2.0 * r.r4 * (r.r1 - r.r2 * ct),
        -2.0 * r.r2 * r.r4 * st,
        r.r1 * r.r1 + r.r2 * r.r2 + r.r4 * r.r4 - r.r3 * r.r3 - 2.0 * r.r1 * r.r2 * ct,
    };
}

} // namespace

std::optional<double> solve_output(const LinkageDims& r, double theta_in, int branch) {
    const auto [a, b, c] = coeffs(r, theta_in);
    const double s = branch >= 0 ? 1.0 : -1.0;

    double disc = b * b - c * c + a * a;
    // Collapse the radical at dead centers so the two inversions coincide
    // there exactly despite roundoff in the limit angles.
    const double mag = b * b + c * c + a * a;
    if (std::abs(disc) < 1e-12 * mag) disc = 0.0;
    if (disc < 0.0) return std::nullopt;
    const double root = std::sqrt(disc);

    if (mag == 0.0) return 0.0; // fully degenerate folding pose; angle is arbitrary

    // tan(th/2) roots of (c-a) t^2 + 2 b t + (a+c) = 0. Pick the algebraically
    // equivalent form that avoids cancellation in -b + s*root; IEEE division by
    // a zero denominator lands on the t -> inf root, i.e. th = pi.
    double t;
    if (s * b > 0.0) t = (a + c) / (-b - s * root);
    else {
        const double num = -b + s * root;
        if (num == 0.0 && c == a) return kPi; // double root at pi
        t = num / (c - a);
    }
    return wrap_pi(2.0 * std::atan(t));
}

double loop_closure_residual(const LinkageDims& r, double theta_in, double theta_out) {
    const double ax = r.r2 * std::cos(theta_in);
    const double ay = r.r2 * std::sin(theta_in);
    const double bx = r.r1 + r.r4 * std::cos(theta_out);
    const double by = r.r4 * std::sin(theta_out);
    return std::abs(std::hypot(bx - ax, by - ay) - r.r3);
}

double InputRange::clamp(double phi) const {
    if (full_revolution || contains(phi)) return phi;
    if (phi < theta_min) return theta_min;
    if (phi > kTwoPi + theta_max) return kTwoPi + theta_max;
    // In the gap between the legs: snap to the nearer end.
    return (phi - theta_max <= kTwoPi + theta_min - phi) ? theta_max : kTwoPi + theta_min;
}

namespace {

inline double radical(const LinkageDims& r, double theta_in) {
    const auto [a, b, c] = coeffs(r, theta_in);
    return b * b - c * c + a * a;
}

// Sign-sweep fallback: bracket the radical's zero crossings on [-pi, pi) and
// bisect. Used when the closed-form candidates disagree with a probe check.
InputRange sweep_range(const LinkageDims& r) {
    constexpr int kSteps = 8192;
    const double h = kTwoPi / kSteps;
    std::array<double, 4> zeros{};
    int nz = 0;
    double prev = radical(r, -kPi);
    for (int i = 1; i <= kSteps && nz < 4; ++i) {
        const double th = -kPi + i * h;
        const double cur = radical(r, th);
        if ((prev < 0.0) != (cur < 0.0)) {
            double lo = th - h, hi = th;
            double flo = prev;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = radical(r, mid);
                if ((flo < 0.0) == (fm < 0.0)) { lo = mid; flo = fm; }
                else hi = mid;
            }
            zeros[nz++] = 0.5 * (lo + hi);
        }
        prev = cur;
    }
    if (nz == 0) throw std::logic_error("input_range: no dead center found for rocker-input linkage");
    InputRange out;
    out.full_revolution = false;
    if (nz == 2) {
        const double mid = 0.5 * (zeros[0] + zeros[1]);
        if (radical(r, mid) >= 0.0) { out.theta_min = zeros[0]; out.theta_max = zeros[1]; }
        else { out.theta_min = zeros[1]; out.theta_max = zeros[0] + kTwoPi; } // arc through pi
    } else if (nz == 4) {
        // Symmetric arc pair; report the one on positive angles.
        out.theta_min = zeros[2];
        out.theta_max = zeros[3];
        if (radical(r, 0.5 * (out.theta_min + out.theta_max)) < 0.0)
            throw std::logic_error("input_range: inconsistent sweep brackets");
    } else {
        throw std::logic_error("input_range: unexpected dead-center count");
    }
    return out;
}

} // namespace

InputRange input_range(const LinkageDims& r, const TypeConfig& cfg) {
    InputRange out;
    if (input_is_crank(cfg.type_id)) {
        out.full_revolution = true;
        return out;
    }

    // Dead centers have links 3 and 4 collinear: the pivot-to-pivot distance of
    // the driver equals r3 +- r4, which by the law of cosines bounds cos(th_in).
    const double c_fold = (r.r1 * r.r1 + r.r2 * r.r2 - (r.r3 - r.r4) * (r.r3 - r.r4)) /
                          (2.0 * r.r1 * r.r2);
    const double c_ext = (r.r1 * r.r1 + r.r2 * r.r2 - (r.r3 + r.r4) * (r.r3 + r.r4)) /
                         (2.0 * r.r1 * r.r2);

    const bool fold_active = c_fold < 1.0;  // folded collinearity reachable
    const bool ext_active = c_ext > -1.0;   // extended collinearity reachable

    out.full_revolution = false;
    if (fold_active && ext_active) {
        // Two symmetric arcs; use the non-negative one. Its mirror, paired with
        // the opposite inversion, realizes the same motions.
        out.theta_min = std::acos(std::min(1.0, c_fold));
        out.theta_max = std::acos(std::max(-1.0, c_ext));
    } else if (ext_active) {
        const double th = std::acos(std::max(-1.0, c_ext));
        out.theta_min = -th;
        out.theta_max = th;
    } else if (fold_active) {
        const double th = std::acos(std::min(1.0, c_fold));
        out.theta_min = th;
        out.theta_max = kTwoPi - th; // arc through pi, kept unwrapped
    } else {
        throw std::logic_error("input_range: rocker-input type classified but full circle reachable");
    }

    // Validate with a probe; fall back to the radical-sign sweep if the
    // analytic candidates were ambiguous.
    const double probe = 0.5 * (out.theta_min + out.theta_max);
    if (!(radical(r, probe) >= 0.0) || !(out.theta_min < out.theta_max)) return sweep_range(r);
    return out;
}

std::optional<double> simulate_cycle(const LinkageDims& r, const TypeConfig& cfg, double phi) {
    const int s = inversion_sign(cfg.inversion);
    if (input_is_crank(cfg.type_id)) return solve_output(r, phi, s);

    const InputRange range = input_range(r, cfg);
    if (phi >= range.theta_min && phi <= range.theta_max)
        return solve_output(r, phi, s);
    if (phi >= kTwoPi + range.theta_min && phi <= kTwoPi + range.theta_max)
        return solve_output(r, phi - kTwoPi, -s);
    return std::nullopt;
}

} // namespace fourbar
