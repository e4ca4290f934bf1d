#include "capsim/magnetics.hpp"

#include <array>
#include <cmath>

#include "capsim/errors.hpp"
#include "capsim/numopt.hpp"

namespace capsim::mag {

namespace {
constexpr double kMinRange = 1e-6;      // m, dipole singularity guard
constexpr double kAxisZLimit = 1.0 - 1e-9;
}  // namespace

MagnetParams MagnetParams::hardware_defaults() {
    // Sphere Ø50 mm: V = 4/3·pi·r³; ring 12.8 mm OD, 9 mm ID, 15 mm long.
    const double r_sphere = 0.025;
    const double v_sphere = 4.0 / 3.0 * kPi * r_sphere * r_sphere * r_sphere;
    const double v_ring = kPi * (0.0064 * 0.0064 - 0.0045 * 0.0045) * 0.015;
    MagnetParams p;
    p.m_a = 1.30 * v_sphere / kMu0;
    p.m_c = 1.26 * v_ring / kMu0;
    p.theta_ar_deg = 45.0;
    return p;
}

AxisAngles axis_angles_from_unit(const Vec3& w) {
    if (std::abs(w.z()) >= kAxisZLimit)
        throw DegenerateAxis("axis too close to ±z for (theta_z, theta_y) angles");
    double tz = rad2deg(std::atan2(w.y(), w.x()));
    if (tz < 0.0) tz += 360.0;
    if (tz >= 360.0) tz -= 360.0;
    const double ty = rad2deg(std::asin(std::clamp(w.z(), -1.0, 1.0)));
    return {tz, ty};
}

Vec3 unit_from_axis_angles(const AxisAngles& a) {
    return rot_z(a.theta_z_deg) * rot_y(-a.theta_y_deg) * Vec3::UnitX();
}

Vec3 actuator_moment(const AxisAngles& axis, double theta_ax_deg) {
    return rot_z(axis.theta_z_deg) * rot_y(-axis.theta_y_deg) *
           rot_x(theta_ax_deg) * Vec3::UnitZ();
}

Vec3 actuation_axis(const Vec3& w_dc, const Vec3& r_hat) {
    const Vec3 v = 3.0 * r_hat * r_hat.dot(w_dc) - w_dc;
    const double n = v.norm();
    // (3 r̂ r̂ᵀ − I) has eigenvalues {2, −1, −1}; the image of a unit vector
    // has norm in [1, 2].
    if (n < 1e-12) throw ZeroVector("degenerate actuation axis");
    return v / n;
}

Vec3 relative_position(const ActuatorConfig& cfg, const AxisAngles& heading) {
    return cfg.d * (rot_z(heading.theta_z_deg) * rot_y(-heading.theta_y_deg) *
                    rot_x(cfg.beta_deg) * rot_y(cfg.alpha_deg) * (-Vec3::UnitZ()));
}

Vec3 dipole_field(const Vec3& m_vec, const Vec3& r) {
    const double dist = r.norm();
    if (dist < kMinRange) throw SingularRange("dipole field evaluated inside singular range");
    const Vec3 r_hat = r / dist;
    const double c = kMu0 / (4.0 * kPi * dist * dist * dist);
    return c * (3.0 * r_hat * r_hat.dot(m_vec) - m_vec);
}

Vec3 dipole_force(const Vec3& m_a_vec, const Vec3& m_c_vec, const Vec3& r) {
    const double dist = r.norm();
    if (dist < kMinRange) throw SingularRange("dipole force evaluated inside singular range");
    const Vec3 r_hat = r / dist;
    const double ar = m_a_vec.dot(r_hat);
    const double cr = m_c_vec.dot(r_hat);
    const double c = 3.0 * kMu0 / (4.0 * kPi * dist * dist * dist * dist);
    return c * (ar * m_c_vec + cr * m_a_vec + (m_a_vec.dot(m_c_vec) - 5.0 * ar * cr) * r_hat);
}

Vec3 rrma_force(const ActuatorConfig& cfg, const AxisAngles& heading,
                const MagnetParams& params) {
    const Vec3 w_dc = unit_from_axis_angles(heading);
    const Vec3 r = relative_position(cfg, heading);
    const Vec3 r_hat = r / r.norm();
    const Vec3 w_a = actuation_axis(w_dc, r_hat);
    const Vec3 m_a = params.m_a * actuator_moment(axis_angles_from_unit(w_a), cfg.theta_ax_deg);
    // The capsule tracks the rotating field: its moment follows the local
    // field direction (which lies in the plane perpendicular to w_dc).
    const Vec3 b = dipole_field(m_a, r);
    const Vec3 m_c = params.m_c * (b / b.norm());
    return dipole_force(m_a, m_c, r);
}

PoseSolve solve_actuator_config(const Vec3& f_d, const Vec3& w_nc,
                                const MagnetParams& params,
                                const std::optional<ActuatorConfig>& warm_start,
                                const PoseBounds& bounds) {
    const AxisAngles heading = axis_angles_from_unit(w_nc);

    opt::BoundedLsqProblem problem;
    problem.lower = Eigen::Vector3d(bounds.d_min, -bounds.tilt_max_deg, -bounds.tilt_max_deg);
    problem.upper = Eigen::Vector3d(bounds.d_max, bounds.tilt_max_deg, bounds.tilt_max_deg);
    problem.max_iter = 200;
    problem.step_tol = 1e-10;
    problem.residual = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        ActuatorConfig c;
        c.d = x[0];
        c.alpha_deg = x[1];
        c.beta_deg = x[2];
        c.theta_ax_deg = 180.0;
        return f_d - rrma_force(c, heading, params);
    };

    std::vector<Eigen::Vector3d> starts;
    if (warm_start) {
        starts.emplace_back(std::clamp(warm_start->d, bounds.d_min, bounds.d_max),
                            std::clamp(warm_start->alpha_deg, -bounds.tilt_max_deg, bounds.tilt_max_deg),
                            std::clamp(warm_start->beta_deg, -bounds.tilt_max_deg, bounds.tilt_max_deg));
    } else {
        starts.emplace_back(0.5 * (bounds.d_min + bounds.d_max), 0.0, 0.0);
    }
    const double t = bounds.tilt_max_deg;
    starts.emplace_back(bounds.d_min, -t, -t);
    starts.emplace_back(bounds.d_min, t, t);
    starts.emplace_back(bounds.d_max, -t, t);
    starts.emplace_back(bounds.d_max, t, -t);

    PoseSolve best;
    bool have_best = false;
    for (const auto& s : starts) {
        problem.x0 = s;
        const opt::LsqResult r = opt::least_squares_bounded(problem);
        if (!have_best || r.residual_norm < best.residual) {
            best.config = ActuatorConfig{r.x[0], r.x[1], r.x[2], 180.0};
            best.residual = r.residual_norm;
            best.converged = r.converged;
            have_best = true;
        }
        if (best.converged && best.residual < 1e-9) break;  // exact fit found
    }
    return best;
}

}  // namespace capsim::mag
