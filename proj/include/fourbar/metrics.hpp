#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "fourbar/datagen.hpp"
#include "fourbar/kinematics.hpp"

namespace fourbar {

struct ZeroVector : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidDims : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

double cosine_similarity(const std::array<double, 4>& a, const std::array<double, 4>& b);

struct EvalResult {
    double s_simul = 0; // in [0, 2], 0 = perfect
    std::vector<double> pred_out;     // simulated outputs, radians
    std::vector<double> abs_err_deg;  // wrap-aware |pred - target| in degrees
    std::vector<bool> reachable;      // false where the input had to be clamped
};

// S = 1 - (1/n) sum cos(target_out_i - f(in_i)) with f = simulate_cycle of
// r_pred. Inputs outside a rocker's range are evaluated at the nearest dead
// center (clamped) so the metric stays total; infeasible types then surface
// as a large score rather than an error.
EvalResult simulation_metric(const LinkageDims& r_pred, const TypeConfig& cfg, const PointSeq& points);

// Wrap-aware absolute angular error in degrees.
double absolute_error_deg(double theta_out, double theta_pred);

} // namespace fourbar
