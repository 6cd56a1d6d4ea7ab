#pragma once

#include <cmath>

namespace fourbar {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// Wrap an angle into (-pi, pi].
inline double wrap_pi(double a) {
    a = std::remainder(a, kTwoPi);
    if (a <= -kPi) a = kPi;
    return a;
}

inline double deg_to_rad(double d) { return d * (kPi / 180.0); }
inline double rad_to_deg(double r) { return r * (180.0 / kPi); }

// Smallest signed difference a-b on the circle, in (-pi, pi].
inline double angle_diff(double a, double b) { return wrap_pi(a - b); }

} // namespace fourbar
