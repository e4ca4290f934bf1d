// Common vector/matrix aliases and rotation helpers.
#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace capsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kMu0 = 4.0e-7 * kPi;  // vacuum permeability, T·m/A

inline double deg2rad(double deg) { return deg * (kPi / 180.0); }
inline double rad2deg(double rad) { return rad * (180.0 / kPi); }

// Right-handed rotations about the +k axis, angle in degrees.
inline Mat3 rot_x(double deg) {
    const double c = std::cos(deg2rad(deg)), s = std::sin(deg2rad(deg));
    Mat3 m;
    m << 1, 0, 0,
         0, c, -s,
         0, s, c;
    return m;
}

inline Mat3 rot_y(double deg) {
    const double c = std::cos(deg2rad(deg)), s = std::sin(deg2rad(deg));
    Mat3 m;
    m << c, 0, s,
         0, 1, 0,
        -s, 0, c;
    return m;
}

inline Mat3 rot_z(double deg) {
    const double c = std::cos(deg2rad(deg)), s = std::sin(deg2rad(deg));
    Mat3 m;
    m << c, -s, 0,
         s, c, 0,
         0, 0, 1;
    return m;
}

/// Angle between two unit vectors, degrees in [0, 180].
inline double angle_between_deg(const Vec3& a, const Vec3& b) {
    const double c = std::clamp(a.dot(b), -1.0, 1.0);
    return rad2deg(std::acos(c));
}

}  // namespace capsim
