#include "fourbar/metrics.hpp"

#include <cmath>

namespace fourbar {

double cosine_similarity(const std::array<double, 4>& a, const std::array<double, 4>& b) {
    double dot = 0, na = 0, nb = 0;
    for (int i = 0; i < 4; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw ZeroVector("cosine_similarity: zero-norm vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

EvalResult simulation_metric(const LinkageDims& r_pred, const TypeConfig& cfg, const PointSeq& points) {
    if (!r_pred.is_valid()) throw InvalidDims("simulation_metric: dims violate validity conditions");
    if (points.empty()) throw std::invalid_argument("simulation_metric: empty point sequence");

    EvalResult res;
    res.pred_out.reserve(points.size());
    res.abs_err_deg.reserve(points.size());
    res.reachable.reserve(points.size());

    const bool crank = input_is_crank(cfg.type_id);
    InputRange range;
    if (!crank) range = input_range(r_pred, cfg);

    double cos_sum = 0;
    for (const auto& p : points) {
        double phi = p.theta_in;
        bool ok = true;
        if (!crank && !range.contains(phi)) {
            phi = range.clamp(phi);
            ok = false;
        }
        auto out = simulate_cycle(r_pred, cfg, phi);
        if (!out) {
            // Clamped onto a dead center that rounds outside; nudge inward.
            out = simulate_cycle(r_pred, cfg, range.clamp(0.5 * (range.theta_min + range.theta_max)));
            if (!out) throw std::logic_error("simulation_metric: range midpoint unreachable");
            ok = false;
        }
        res.pred_out.push_back(*out);
        res.abs_err_deg.push_back(absolute_error_deg(p.theta_out, *out));
        res.reachable.push_back(ok);
        cos_sum += std::cos(p.theta_out - *out);
    }
    res.s_simul = 1.0 - cos_sum / static_cast<double>(points.size());
    return res;
}

double absolute_error_deg(double theta_out, double theta_pred) {
    return std::abs(rad_to_deg(angle_diff(theta_pred, theta_out)));
}

} // namespace fourbar
