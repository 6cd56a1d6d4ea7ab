#include "fourbar/pointsfile.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fourbar {

namespace {

std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

PointsFile parse_points_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw PointsParseError("points file is empty");

    PointsFile pf;
    const std::string header = strip(line);
    if (header == "theta_in_deg,theta_out_deg") pf.mode = PointsFile::Mode::absolute;
    else if (header == "d_theta_in_deg,d_theta_out_deg") pf.mode = PointsFile::Mode::relative;
    else throw PointsParseError("unrecognized points header: '" + header + "'");

    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string row = strip(line);
        if (row.empty()) continue;
        const size_t comma = row.find(',');
        if (comma == std::string::npos)
            throw PointsParseError("line " + std::to_string(lineno) + ": expected two comma-separated values");
        try {
            size_t used = 0;
            const std::string a = strip(row.substr(0, comma));
            const std::string b = strip(row.substr(comma + 1));
            const double in_deg = std::stod(a, &used);
            if (used != a.size()) throw std::invalid_argument(a);
            const double out_deg = std::stod(b, &used);
            if (used != b.size()) throw std::invalid_argument(b);
            pf.points.push_back({deg_to_rad(in_deg), deg_to_rad(out_deg)});
        } catch (const std::exception&) {
            throw PointsParseError("line " + std::to_string(lineno) + ": cannot parse '" + row + "'");
        }
    }

    if (pf.mode == PointsFile::Mode::absolute && pf.points.empty())
        throw PointsParseError("absolute points file needs at least one row");
    if (pf.mode == PointsFile::Mode::relative) {
        if (pf.points.size() < 2)
            throw PointsParseError("relative points file needs the zero reference plus at least one row");
        if (pf.points[0].theta_in != 0.0 || pf.points[0].theta_out != 0.0)
            throw PointsParseError("relative points must start with the 0,0 reference row");
    }
    return pf;
}

PointsFile read_points_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw PointsParseError("cannot open points file " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_points_csv(buf.str());
}

void write_points_file(const std::string& path, const PointsFile& pf) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << (pf.mode == PointsFile::Mode::absolute ? "theta_in_deg,theta_out_deg"
                                                 : "d_theta_in_deg,d_theta_out_deg")
       << '\n';
    char buf[80];
    for (const auto& p : pf.points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", rad_to_deg(p.theta_in), rad_to_deg(p.theta_out));
        os << buf;
    }
}

} // namespace fourbar
