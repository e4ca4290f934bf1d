// Trajectory representation and reference generation: natural cubic spline
// through user key points, nearest-point projection, and the receding
// reference window used by the predictive controllers.
#pragma once

#include <vector>

#include "capsim/geometry.hpp"

namespace capsim::path {

class SplinePath {
public:
    /// Interpolating natural cubic spline with chord-length knot spacing
    /// normalized to s in [0, 1]. Requires >= 2 points; throws
    /// DuplicateConsecutivePoints on zero-length chords and ZeroVector if
    /// the derivative vanishes anywhere.
    explicit SplinePath(std::vector<Vec3> key_points);

    Vec3 position(double s) const;    // clamped to [0, 1]
    Vec3 derivative(double s) const;  // dp/ds
    Vec3 tangent(double s) const;     // unit derivative

    /// Arc length from s = 0, from a dense chord table (used for metrics).
    double arc_length(double s) const;
    double length() const { return arc_table_.back(); }

    const std::vector<Vec3>& key_points() const { return pts_; }
    const std::vector<double>& knots() const { return knots_; }

private:
    int segment_of(double s) const;

    std::vector<Vec3> pts_;
    std::vector<double> knots_;
    std::vector<Vec3> second_derivs_;
    std::vector<double> arc_s_, arc_table_;
};

struct ReferencePoint {
    Vec3 p_d = Vec3::Zero();
    Vec3 tangent = Vec3::UnitX();
    double s = 0.0;
};

struct ReferenceWindow {
    std::vector<ReferencePoint> points;  // N + 1 entries
    std::vector<Vec3> velocities;        // N + 1 entries, ‖v‖ = V_c
};

/// Closest point on the path to p_c. Grid scan multi-started into local
/// refinement; equidistant candidates break toward smaller s.
ReferencePoint nearest_point(const SplinePath& path, const Vec3& p_c);

/// Desired velocity from the (SLERP-limited) heading: V_c · w_nc.
Vec3 desired_velocity(const Vec3& w_nc, double V_c);

/// Reference sequence for a horizon of N steps: the first point is the
/// nearest-point projection of p_c, each later point projects the previous
/// reference advanced by its desired velocity over one control period.
ReferenceWindow reference_sequence(const SplinePath& path, const Vec3& p_c, int N,
                                   double V_c, double f_c);

}  // namespace capsim::path
