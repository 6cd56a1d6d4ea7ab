#include "fourbar/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace fourbar {

namespace {

// Shift x by whole turns (degrees) to land nearest to ref.
double unwrap_to(double x, double ref) {
    while (x - ref > 180.0) x -= 360.0;
    while (x - ref < -180.0) x += 360.0;
    return x;
}

} // namespace

DisplacementCurve displacement_curve(const LinkageDims& r, const TypeConfig& cfg,
                                     const PointSeq& markers, int samples_per_leg) {
    DisplacementCurve c;
    auto push = [&c](double phi, double out) {
        double v = rad_to_deg(out);
        if (!c.out_deg.empty()) v = unwrap_to(v, c.out_deg.back());
        c.phi_deg.push_back(rad_to_deg(phi));
        c.out_deg.push_back(v);
    };

    if (input_is_crank(cfg.type_id)) {
        for (int i = 0; i <= samples_per_leg; ++i) {
            const double phi = -kPi + kTwoPi * i / samples_per_leg;
            if (auto out = simulate_cycle(r, cfg, phi)) push(phi, *out);
        }
    } else {
        const InputRange range = input_range(r, cfg);
        for (int leg = 0; leg < 2; ++leg) {
            const double shift = leg == 0 ? 0.0 : kTwoPi;
            for (int i = 0; i <= samples_per_leg; ++i) {
                const double phi = shift + range.theta_min +
                                   (range.theta_max - range.theta_min) * i / samples_per_leg;
                if (auto out = simulate_cycle(r, cfg, phi)) push(phi, *out);
            }
        }
    }

    for (const auto& p : markers) {
        const double phi_deg = rad_to_deg(p.theta_in);
        double out = rad_to_deg(p.theta_out);
        // Put the marker on the curve's sheet: unwrap against the nearest sample.
        if (!c.phi_deg.empty()) {
            size_t best = 0;
            for (size_t i = 1; i < c.phi_deg.size(); ++i)
                if (std::abs(c.phi_deg[i] - phi_deg) < std::abs(c.phi_deg[best] - phi_deg)) best = i;
            out = unwrap_to(out, c.out_deg[best]);
        }
        c.marker_phi_deg.push_back(phi_deg);
        c.marker_out_deg.push_back(out);
    }
    return c;
}

namespace {

struct Axis {
    double lo, hi;
    double map(double v, double px_lo, double px_hi) const {
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

Axis fit_axis(const std::vector<double>& a, const std::vector<double>& b) {
    double lo = 1e300, hi = -1e300;
    for (double v : a) { lo = std::min(lo, v); hi = std::max(hi, v); }
    for (double v : b) { lo = std::min(lo, v); hi = std::max(hi, v); }
    if (lo > hi) { lo = -1; hi = 1; }
    const double pad = std::max(1.0, 0.05 * (hi - lo));
    return {lo - pad, hi + pad};
}

double nice_step(double span) {
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag) return m * mag;
    return 10.0 * mag;
}

} // namespace

void write_displacement_svg(const std::string& path, const DisplacementCurve& curve,
                            const std::string& title) {
    const double W = 640, H = 480;
    const double ml = 70, mr = 20, mt = 40, mb = 50;
    const Axis ax = fit_axis(curve.phi_deg, curve.marker_phi_deg);
    const Axis ay = fit_axis(curve.out_deg, curve.marker_out_deg);
    auto X = [&](double v) { return ax.map(v, ml, W - mr); };
    auto Y = [&](double v) { return ay.map(v, H - mb, mt); };

    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    char buf[256];
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"15\">" << title << "</text>\n";

    // grid + ticks
    const double sx = nice_step(ax.hi - ax.lo), sy = nice_step(ay.hi - ay.lo);
    os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\">\n";
    for (double v = std::ceil(ax.lo / sx) * sx; v <= ax.hi; v += sx) {
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>"
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%g</text>\n",
                      X(v), mt, X(v), H - mb, X(v), H - mb + 16, v);
        os << buf;
    }
    for (double v = std::ceil(ay.lo / sy) * sy; v <= ay.hi; v += sy) {
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>"
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%g</text>\n",
                      ml, Y(v), W - mr, Y(v), ml - 6, Y(v) + 4, v);
        os << buf;
    }
    os << "</g>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
       << H - mt - mb << "\" fill=\"none\" stroke=\"#222\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                  "font-size=\"13\">input angle (deg)</text>\n",
                  (ml + W - mr) / 2, H - 12);
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"16\" y=\"%.1f\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                  "font-size=\"13\" transform=\"rotate(-90 16 %.1f)\">output angle (deg)</text>\n",
                  (mt + H - mb) / 2, (mt + H - mb) / 2);
    os << buf;

    // curve; break the polyline where the cycle parameter jumps between legs
    os << "<g fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.8\">\n<polyline points=\"";
    for (size_t i = 0; i < curve.phi_deg.size(); ++i) {
        if (i > 0 && std::abs(curve.phi_deg[i] - curve.phi_deg[i - 1]) > 30.0)
            os << "\"/>\n<polyline points=\"";
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", X(curve.phi_deg[i]), Y(curve.out_deg[i]));
        os << buf;
    }
    os << "\"/>\n</g>\n";

    os << "<g fill=\"#d62728\" stroke=\"white\" stroke-width=\"0.8\">\n";
    for (size_t i = 0; i < curve.marker_phi_deg.size(); ++i) {
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\"/>\n",
                      X(curve.marker_phi_deg[i]), Y(curve.marker_out_deg[i]));
        os << buf;
    }
    os << "</g>\n</svg>\n";
}

void write_curve_csv(const std::string& path, const DisplacementCurve& curve) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << "phi_deg,theta_out_deg\n";
    char buf[80];
    for (size_t i = 0; i < curve.phi_deg.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", curve.phi_deg[i], curve.out_deg[i]);
        os << buf;
    }
}

} // namespace fourbar
