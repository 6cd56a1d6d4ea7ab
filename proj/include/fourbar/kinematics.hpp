#pragma once

#include <array>
#include <optional>
#include <string>

#include "fourbar/angles.hpp"

namespace fourbar {

// Link lengths of a planar four-bar: r1 ground, r2 input, r3 coupler,
// r4 output. The ground link lies on the x-axis (orientation 0).
struct LinkageDims {
    double r1 = 0, r2 = 0, r3 = 0, r4 = 0;

    double sum() const { return r1 + r2 + r3 + r4; }
    std::array<double, 4> as_array() const { return {r1, r2, r3, r4}; }

    // Positivity plus the quadrilateral inequality 2*ri < r1+r2+r3+r4.
    bool is_valid() const;
};

// T-parameterization: T = M r with M = [[1,-1,1,-1],[1,-1,-1,1],[-1,-1,1,1],[1,1,1,1]].
// The signs of t1..t3 determine the linkage type; t4 is the perimeter.
struct TParams {
    double t1 = 0, t2 = 0, t3 = 0, t4 = 0;
    std::array<double, 4> as_array() const { return {t1, t2, t3, t4}; }
};

TParams t_params(const LinkageDims& r);

// Inverse map r = (1/4) M^T T. M is orthogonal up to scale (M^T M = 4 I), so
// this is exact up to rounding. The result may be an invalid linkage; callers
// decide whether to reject (see LinkageDims::is_valid).
LinkageDims dims_from_t(const TParams& t);

enum class Inversion : int { plus = +1, minus = -1 };

inline int inversion_sign(Inversion inv) { return static_cast<int>(inv); }
inline Inversion inversion_from_sign(int s) { return s >= 0 ? Inversion::plus : Inversion::minus; }

// One of the 16 mechanism configurations: type 1..8 by the sign triple of
// (t1,t2,t3), times the geometric inversion used on the forward stroke.
struct TypeConfig {
    int type_id = 1;
    Inversion inversion = Inversion::plus;

    bool operator==(const TypeConfig&) const = default;
};

// Sign triple (sgn t1, sgn t2, sgn t3) for a type id, and the reverse lookup.
std::array<int, 3> type_sign_triple(int type_id);
int type_from_signs(int s1, int s2, int s3);

// Human-readable type names ("Crank Rocker", "Triple Rocker pi0", ...).
std::string type_name(int type_id);
std::string config_name(const TypeConfig& cfg); // e.g. "Crank Rocker+"

// Input link fully rotates only for crank-rocker (1) and double-crank (3);
// every other type is rocker-input.
inline bool input_is_crank(int type_id) { return type_id == 1 || type_id == 3; }

inline constexpr double kFoldTolDefault = 1e-6;

// Type id from the sign triple of t1..t3, or nullopt when any |tj| <= fold_tol
// (folding linkage, excluded from the pipeline).
std::optional<int> classify(const LinkageDims& r, double fold_tol = kFoldTolDefault);

// Position analysis. With theta1 = 0 the output angle solves
//   A cos(th_out) + B sin(th_out) + C = 0,
//   A = 2 r4 (r1 - r2 cos th_in), B = -2 r2 r4 sin th_in,
//   C = r1^2 + r2^2 + r4^2 - r3^2 - 2 r1 r2 cos th_in,
// via the half-angle quadratic. branch (+1/-1) selects the radical sign;
// geometrically +1 places the coupler-output joint on the CCW side of the
// ray from the output pivot towards the input-coupler joint.
// Returns nullopt when the radical is negative (input angle unreachable).
std::optional<double> solve_output(const LinkageDims& r, double theta_in, int branch);

// | dist(input-coupler joint, coupler-output joint) - r3 | for the candidate
// configuration (theta_in, theta_out). Zero iff the pair closes the loop.
double loop_closure_residual(const LinkageDims& r, double theta_in, double theta_out);

// Reachable driver range. Crank-input types cover the full revolution; for
// rocker-input types the cycle parameter runs over
// [theta_min, theta_max] (forward CCW leg, configured inversion) and
// [2pi+theta_min, 2pi+theta_max] (return CW leg, opposite inversion).
// theta_max may exceed pi when the arc straddles the +-pi seam; cycle
// parameters are never normalized.
struct InputRange {
    bool full_revolution = false;
    double theta_min = -kPi;
    double theta_max = kPi;

    bool contains(double phi) const {
        if (full_revolution) return true;
        return (phi >= theta_min && phi <= theta_max) ||
               (phi >= kTwoPi + theta_min && phi <= kTwoPi + theta_max);
    }

    // Nearest point of the cycle-parameter domain (identity inside it).
    double clamp(double phi) const;
};

InputRange input_range(const LinkageDims& r, const TypeConfig& cfg);

// The forward map f_r of the mechanism over one cycle parameter phi.
// Crank-input: solve_output at the configured inversion (periodic in phi).
// Rocker-input: forward leg at the configured inversion, 2pi-shifted return
// leg at the opposite inversion (the inertia-preserving switch at the dead
// center). Returns nullopt when phi is outside the input range.
std::optional<double> simulate_cycle(const LinkageDims& r, const TypeConfig& cfg, double phi);

} // namespace fourbar
