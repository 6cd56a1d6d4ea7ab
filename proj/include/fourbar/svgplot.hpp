#pragma once

#include <string>
#include <vector>

#include "fourbar/datagen.hpp"
#include "fourbar/kinematics.hpp"

namespace fourbar {

struct DisplacementCurve {
    std::vector<double> phi_deg;   // cycle parameter
    std::vector<double> out_deg;   // unwrapped for continuity
    std::vector<double> marker_phi_deg;
    std::vector<double> marker_out_deg;
};

// Sweep the mechanism over its input range and unwrap the output angle so the
// curve is continuous; precision-point markers are shifted by whole turns to
// sit on the same sheet.
DisplacementCurve displacement_curve(const LinkageDims& r, const TypeConfig& cfg,
                                     const PointSeq& markers, int samples_per_leg = 720);

// Self-contained SVG: displacement curve plus precision-point markers.
void write_displacement_svg(const std::string& path, const DisplacementCurve& curve,
                            const std::string& title);

// Companion CSV of the swept curve (phi_deg,theta_out_deg).
void write_curve_csv(const std::string& path, const DisplacementCurve& curve);

} // namespace fourbar
