#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fourbar/pointsfile.hpp"
#include "fourbar/svgplot.hpp"

using namespace fourbar;

TEST_CASE("absolute points parse and convert to radians") {
    const std::string csv =
        "theta_in_deg,theta_out_deg\n"
        "-146.41770,157.56737\n"
        "-68.67784,156.89046\n";
    const PointsFile pf = parse_points_csv(csv);
    CHECK(pf.mode == PointsFile::Mode::absolute);
    REQUIRE(pf.points.size() == 2);
    CHECK(pf.points[0].theta_in == doctest::Approx(deg_to_rad(-146.41770)).epsilon(1e-15));
    CHECK(pf.points[1].theta_out == doctest::Approx(deg_to_rad(156.89046)).epsilon(1e-15));
}

TEST_CASE("relative points require the zero reference row") {
    const std::string good =
        "d_theta_in_deg,d_theta_out_deg\n"
        "0,0\n"
        "-8.70850,-4.03400\n";
    const PointsFile pf = parse_points_csv(good);
    CHECK(pf.mode == PointsFile::Mode::relative);
    REQUIRE(pf.points.size() == 2);

    CHECK_THROWS_AS((void)parse_points_csv("d_theta_in_deg,d_theta_out_deg\n-8.7,-4.0\n"),
                    PointsParseError);
    CHECK_THROWS_AS((void)parse_points_csv("d_theta_in_deg,d_theta_out_deg\n0,0\n"),
                    PointsParseError);
}

TEST_CASE("malformed points files are rejected") {
    CHECK_THROWS_AS((void)parse_points_csv(""), PointsParseError);
    CHECK_THROWS_AS((void)parse_points_csv("in,out\n1,2\n"), PointsParseError);
    CHECK_THROWS_AS((void)parse_points_csv("theta_in_deg,theta_out_deg\n"), PointsParseError);
    CHECK_THROWS_AS((void)parse_points_csv("theta_in_deg,theta_out_deg\n1.0\n"), PointsParseError);
    CHECK_THROWS_AS((void)parse_points_csv("theta_in_deg,theta_out_deg\nabc,1.0\n"), PointsParseError);
    CHECK_THROWS_AS((void)parse_points_csv("theta_in_deg,theta_out_deg\n1.0,2.0x\n"), PointsParseError);
}

TEST_CASE("degree round trip through file I/O is lossless far beyond 1e-9 deg") {
    PointsFile pf;
    pf.mode = PointsFile::Mode::absolute;
    Rng rng(3);
    for (int i = 0; i < 64; ++i) pf.points.push_back({rng.uniform(-kPi, kPi), rng.uniform(-kPi, kPi)});

    const auto path = std::filesystem::temp_directory_path() / "fb_points_roundtrip.csv";
    write_points_file(path.string(), pf);
    const PointsFile back = read_points_file(path.string());
    REQUIRE(back.points.size() == pf.points.size());
    for (size_t i = 0; i < pf.points.size(); ++i) {
        CHECK(std::abs(rad_to_deg(back.points[i].theta_in) - rad_to_deg(pf.points[i].theta_in)) <
              1e-9);
        CHECK(std::abs(rad_to_deg(back.points[i].theta_out) - rad_to_deg(pf.points[i].theta_out)) <
              1e-9);
    }
    std::filesystem::remove(path);
}

TEST_CASE("displacement curve is continuous after unwrapping") {
    GenConfig gc;
    gc.type_cfg = {1, Inversion::minus}; // crank whose output crosses the seam
    gc.seed = 5;
    SampleStream stream(gc);
    const Sample s = stream.next();
    const DisplacementCurve c = displacement_curve(s.dims, s.cfg, s.points, 720);
    REQUIRE(c.phi_deg.size() > 700);
    for (size_t i = 1; i < c.out_deg.size(); ++i)
        CHECK(std::abs(c.out_deg[i] - c.out_deg[i - 1]) < 90.0); // no 360-degree jumps
    REQUIRE(c.marker_phi_deg.size() == s.points.size());
    // markers sit on the curve sheet: nearest curve sample is close
    for (size_t m = 0; m < c.marker_phi_deg.size(); ++m) {
        double best = 1e300;
        for (size_t i = 0; i < c.phi_deg.size(); ++i) {
            const double d = std::abs(c.phi_deg[i] - c.marker_phi_deg[m]);
            if (d < best) {
                best = d;
                CHECK(std::abs(c.out_deg[i] - c.marker_out_deg[m]) < 181.0);
            }
        }
    }
}

TEST_CASE("svg and csv emission") {
    GenConfig gc;
    gc.type_cfg = {5, Inversion::plus}; // rocker: two legs
    gc.seed = 6;
    SampleStream stream(gc);
    const Sample s = stream.next();
    const DisplacementCurve c = displacement_curve(s.dims, s.cfg, s.points, 180);

    const auto svg_path = std::filesystem::temp_directory_path() / "fb_plot.svg";
    write_displacement_svg(svg_path.string(), c, "test");
    std::ifstream is(svg_path);
    std::stringstream buf;
    buf << is.rdbuf();
    const std::string svg = buf.str();
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("<circle") != std::string::npos);
    CHECK(svg.rfind("</svg>") != std::string::npos);

    const auto csv_path = std::filesystem::temp_directory_path() / "fb_plot.csv";
    write_curve_csv(csv_path.string(), c);
    std::ifstream cs(csv_path);
    std::string header;
    std::getline(cs, header);
    CHECK(header == "phi_deg,theta_out_deg");
    size_t rows = 0;
    std::string line;
    while (std::getline(cs, line))
        if (!line.empty()) ++rows;
    CHECK(rows == c.phi_deg.size());

    std::filesystem::remove(svg_path);
    std::filesystem::remove(csv_path);
}
