// Point-dipole field/force physics and the reciprocally-rotating actuation
// geometry: axis parameterizations, actuator moment and rotation axis,
// actuator-relative capsule position, and the inverse pose problem.
#pragma once

#include <optional>

#include "capsim/geometry.hpp"

namespace capsim::mag {

/// Axis direction as (theta_z, theta_y): the rotations that map +x onto the
/// axis via Rot_z(theta_z) * Rot_y(-theta_y) * [1,0,0].
struct AxisAngles {
    double theta_z_deg = 0.0;  // [0, 360)
    double theta_y_deg = 0.0;  // (-90, 90)
};

/// Actuator pose relative to the capsule: distance d plus the two tilt
/// angles of the capsule->actuator ray, and the rotation phase theta_ax.
struct ActuatorConfig {
    double d = 0.175;            // m
    double alpha_deg = 0.0;
    double beta_deg = 0.0;
    double theta_ax_deg = 180.0;  // reciprocation center
};

struct MagnetParams {
    double m_a = 67.7;            // actuator dipole magnitude, A·m²
    double m_c = 0.98;            // capsule dipole magnitude, A·m²
    double theta_ar_deg = 45.0;   // reciprocation half-amplitude

    /// Defaults from the hardware: Ø50 mm N42 sphere (B_r = 1.30 T) and a
    /// 12.8/9 x 15 mm N38SH ring (B_r = 1.26 T), m = B_r·V/mu0.
    static MagnetParams hardware_defaults();
};

struct PoseBounds {
    double d_min = 0.10, d_max = 0.25;  // m
    double tilt_max_deg = 15.0;          // |alpha|, |beta| bound
};

struct PoseSolve {
    ActuatorConfig config;
    double residual = 0.0;  // ‖f_d − f(config)‖, N
    bool converged = false;
};

/// Decompose a unit vector into (theta_z, theta_y). Throws DegenerateAxis
/// when |w.z| >= 1 - 1e-9.
AxisAngles axis_angles_from_unit(const Vec3& w);

/// Inverse of axis_angles_from_unit: Rot_z(theta_z)·Rot_y(-theta_y)·x̂.
Vec3 unit_from_axis_angles(const AxisAngles& a);

/// Actuator moment direction after rotating by theta_ax about its axis:
/// Rot_z(theta_az)·Rot_y(-theta_ay)·Rot_x(theta_ax)·ẑ. Always perpendicular
/// to the actuator rotation axis.
Vec3 actuator_moment(const AxisAngles& axis, double theta_ax_deg);

/// Actuator rotation axis generating a field rotating about w_dc at the
/// capsule: unit((3 r̂ r̂ᵀ − I) w_dc).
Vec3 actuation_axis(const Vec3& w_dc, const Vec3& r_hat);

/// Capsule position relative to the actuator, r = p_c − p_a =
/// d·Rot_z(theta_cz)·Rot_y(-theta_cy)·Rot_x(beta)·Rot_y(alpha)·(−ẑ).
Vec3 relative_position(const ActuatorConfig& cfg, const AxisAngles& heading);

/// Field of a point dipole m_vec (A·m²) at displacement r (m), in tesla.
Vec3 dipole_field(const Vec3& m_vec, const Vec3& r);

/// Force on dipole m_c_vec due to m_a_vec, with r pointing from the actuator
/// dipole to the capsule dipole. Equals the gradient of m_c·b(r) with
/// respect to the capsule position.
Vec3 dipole_force(const Vec3& m_a_vec, const Vec3& m_c_vec, const Vec3& r);

/// Magnetic force on the capsule for an actuator configuration, evaluated at
/// the configured theta_ax (reciprocation center by default). The capsule
/// moment is taken aligned with the local rotating field.
Vec3 rrma_force(const ActuatorConfig& cfg, const AxisAngles& heading,
                const MagnetParams& params);

/// Solve for (d, alpha, beta) reproducing the desired force f_d with the
/// capsule axis held at w_nc (theta_ax = 180°). Multi-start bounded
/// least squares; the returned config always lies inside the bounds.
PoseSolve solve_actuator_config(const Vec3& f_d, const Vec3& w_nc,
                                const MagnetParams& params,
                                const std::optional<ActuatorConfig>& warm_start = {},
                                const PoseBounds& bounds = {});

}  // namespace capsim::mag
