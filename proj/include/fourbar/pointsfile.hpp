#pragma once

#include <string>

#include "fourbar/datagen.hpp"

namespace fourbar {

struct PointsParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// CSV of precision points in degrees. The header selects the mode:
//   theta_in_deg,theta_out_deg         absolute points, >= 1 row
//   d_theta_in_deg,d_theta_out_deg     relative offsets, >= 2 rows, first row 0,0
// Values are converted to radians on load.
struct PointsFile {
    enum class Mode { absolute, relative };
    Mode mode = Mode::absolute;
    PointSeq points;
};

PointsFile read_points_file(const std::string& path);
PointsFile parse_points_csv(const std::string& text);
void write_points_file(const std::string& path, const PointsFile& pf);

} // namespace fourbar
