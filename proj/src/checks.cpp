#include "capsim/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "capsim/control.hpp"
#include "capsim/magnetics.hpp"
#include "capsim/path.hpp"
#include "capsim/presets.hpp"
#include "capsim/rng.hpp"
#include "capsim/simloop.hpp"

namespace capsim::checks {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

}  // namespace

CheckResult check_field_rotation(const CheckOptions& opts, int samples) {
    Rng rng(opts.seed);
    const double m_a = 67.7, d = 0.15;
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const Vec3 w_dc = rng.unit_vector();
        const Vec3 r_hat = rng.unit_vector();
        const double theta_ax = rng.uniform(0.0, 360.0);
        const Vec3 w_a = mag::actuation_axis(w_dc, r_hat);
        if (std::abs(w_a.z()) > 0.999999) {
            continue;  // angle decomposition undefined this close to ±z
        }
        const Vec3 m_hat = mag::actuator_moment(mag::axis_angles_from_unit(w_a), theta_ax);
        const Vec3 b = mag::dipole_field(m_a * m_hat, d * r_hat);
        worst = std::max(worst, std::abs(b.dot(w_dc)) / b.norm());
    }
    return {"field-rotation", worst < 1e-10,
            "max |b·w_dc|/|b| = " + fmt(worst) + " over " + std::to_string(samples) + " samples"};
}

CheckResult check_force_gradient(const CheckOptions& opts, int samples) {
    Rng rng(opts.seed + 1);
    double worst = 0.0;
    const double h = 1e-6;
    for (int k = 0; k < samples; ++k) {
        const Vec3 m_a = rng.uniform(10.0, 100.0) * rng.unit_vector();
        const Vec3 m_c = rng.uniform(0.1, 2.0) * rng.unit_vector();
        const Vec3 r = rng.uniform(0.08, 0.30) * rng.unit_vector();

        Vec3 analytic = mag::dipole_force(m_a, m_c, r);
        if (opts.mutate_dipole_force_sign) analytic = -analytic;

        // Independent oracle: f = grad of U(p_c) = m_c·b(p_c - p_a) by
        // central differences in the capsule position.
        Vec3 fd;
        for (int i = 0; i < 3; ++i) {
            Vec3 rp = r, rm = r;
            rp[i] += h;
            rm[i] -= h;
            fd[i] = (m_c.dot(mag::dipole_field(m_a, rp)) - m_c.dot(mag::dipole_field(m_a, rm))) /
                    (2.0 * h);
        }
        worst = std::max(worst, (analytic - fd).norm() / std::max(fd.norm(), 1e-30));
    }
    return {"force-gradient", worst < 1e-6,
            "max rel err = " + fmt(worst) + " over " + std::to_string(samples) + " samples"};
}

CheckResult check_nearest_point_oracle(const CheckOptions& opts, int queries_per_path,
                                       int grid) {
    Rng rng(opts.seed + 2);
    double worst_excess = 0.0;
    std::string worst_path;
    bool ok = true;
    for (const auto& name : presets::path_preset_names()) {
        const path::SplinePath path(presets::path_preset(name));

        std::vector<Vec3> grid_pts(grid + 1);
        for (int k = 0; k <= grid; ++k)
            grid_pts[k] = path.position(static_cast<double>(k) / grid);

        Vec3 lo = grid_pts.front(), hi = grid_pts.front();
        for (const auto& p : grid_pts) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        const Vec3 span = (hi - lo).cwiseMax(0.05);

        for (int q = 0; q < queries_per_path; ++q) {
            Vec3 query;
            for (int i = 0; i < 3; ++i)
                query[i] = rng.uniform(lo[i] - 0.2 * span[i], hi[i] + 0.2 * span[i]);

            int best_k = 0;
            double best_d2 = std::numeric_limits<double>::max();
            for (int k = 0; k <= grid; ++k) {
                const double d2 = (grid_pts[k] - query).squaredNorm();
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best_k = k;
                }
            }
            const double d_bf = std::sqrt(best_d2);
            double chord = 0.0;
            if (best_k > 0) chord = std::max(chord, (grid_pts[best_k] - grid_pts[best_k - 1]).norm());
            if (best_k < grid) chord = std::max(chord, (grid_pts[best_k + 1] - grid_pts[best_k]).norm());

            const auto rp = path::nearest_point(path, query);
            const double d_prod = (rp.p_d - query).norm();
            const double excess = std::abs(d_prod - d_bf);
            if (excess > chord) ok = false;
            if (excess > worst_excess) {
                worst_excess = excess;
                worst_path = name;
            }
        }
    }
    return {"nearest-point-oracle", ok,
            "max |d - d_grid| = " + fmt(worst_excess) + " (worst on " + worst_path + ", " +
                std::to_string(queries_per_path) + " queries/path, grid " + std::to_string(grid) +
                ")"};
}

CheckResult check_rmmpc_degeneracy(const CheckOptions& opts, int samples) {
    Rng rng(opts.seed + 3);
    const path::SplinePath path(presets::path_preset("serpentine300"));
    ctrl::MpcConfig cfg = ctrl::MpcConfig::defaults();
    ctrl::PlantParams plant;
    plant.rho_fric = 0.05;

    ctrl::ScenarioSet equal;
    equal.scenarios = {{1.0, 0.50}, {1.0, 0.225}, {1.0, 0.05}, {1.0, 0.225}};

    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        env::CapsuleState x;
        const double s = rng.uniform(0.05, 0.9);
        x.p = path.position(s) + rng.ball(0.004);
        x.v = 0.003 * rng.unit_vector();
        x.heading = path.tangent(s);
        const auto window = path::reference_sequence(path, x.p, cfg.N, 0.003, cfg.f_c);
        const auto nominal = ctrl::mpc_solve(x, window, cfg, plant);
        const auto robust = ctrl::rmmpc_solve(x, window, cfg, plant, equal);
        worst = std::max(worst, (nominal.f_d - robust.f_d).norm());
    }
    return {"rmmpc-degeneracy", worst < 1e-6,
            "max |f_mpc - f_rmmpc| = " + fmt(worst) + " N over " + std::to_string(samples) +
                " states"};
}

CheckResult check_slerp(const CheckOptions& opts, int samples) {
    Rng rng(opts.seed + 4);
    double worst_norm = 0.0, worst_angle = 0.0;
    for (int k = 0; k < samples; ++k) {
        const Vec3 w_c = rng.unit_vector();
        // Controlled angle so the min(phi, 45°) law is checked across range.
        const double phi = rng.uniform(0.0, 180.0);
        Vec3 u = w_c.cross(rng.unit_vector());
        while (u.norm() < 1e-6) u = w_c.cross(rng.unit_vector());
        u.normalize();
        const Vec3 w_dc =
            (std::cos(deg2rad(phi)) * w_c + std::sin(deg2rad(phi)) * u).normalized();
        const Vec3 out = sim::slerp_heading(w_c, w_dc);
        worst_norm = std::max(worst_norm, std::abs(out.norm() - 1.0));
        const double got = angle_between_deg(w_c, out);
        const double want = std::min(angle_between_deg(w_c, w_dc), 45.0);
        worst_angle = std::max(worst_angle, std::abs(got - want));
    }
    // Continuity bracket at the threshold.
    double bracket = 0.0;
    for (double eps : {1e-3, 1e-5}) {
        const Vec3 w_c = Vec3::UnitX();
        const Vec3 u = Vec3::UnitY();
        auto dir = [&](double phi) {
            return Vec3(std::cos(deg2rad(phi)) * w_c + std::sin(deg2rad(phi)) * u);
        };
        const Vec3 below = sim::slerp_heading(w_c, dir(45.0 - eps));
        const Vec3 above = sim::slerp_heading(w_c, dir(45.0 + eps));
        bracket = std::max(bracket, (below - above).norm() / eps);
    }
    const bool ok = worst_norm < 1e-12 && worst_angle < 1e-9 && bracket < 0.1;
    return {"slerp", ok,
            "max norm dev = " + fmt(worst_norm) + ", max angle dev = " + fmt(worst_angle) +
                " deg, bracket slope = " + fmt(bracket)};
}

std::vector<CheckResult> run_all(const CheckOptions& opts, const std::string& filter) {
    std::vector<CheckResult> all;
    auto want = [&](const char* name) {
        return filter.empty() || std::string(name).find(filter) != std::string::npos;
    };
    if (want("field-rotation")) all.push_back(check_field_rotation(opts));
    if (want("force-gradient")) all.push_back(check_force_gradient(opts));
    if (want("nearest-point-oracle")) all.push_back(check_nearest_point_oracle(opts));
    if (want("rmmpc-degeneracy")) all.push_back(check_rmmpc_degeneracy(opts));
    if (want("slerp")) all.push_back(check_slerp(opts));
    return all;
}

}  // namespace capsim::checks
