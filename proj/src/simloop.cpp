#include "capsim/simloop.hpp"

#include <algorithm>
#include <cmath>

#include "capsim/errors.hpp"

namespace capsim::sim {

namespace {
constexpr double kDivergenceLimit = 0.5;  // m
constexpr int kCompletionStreak = 5;      // steps with s* >= threshold
constexpr double kCompletionS = 0.999;
}  // namespace

ControllerType controller_from_name(std::string_view name) {
    if (name == "pd") return ControllerType::pd;
    if (name == "ac") return ControllerType::ac;
    if (name == "mpc") return ControllerType::mpc;
    if (name == "rmmpc") return ControllerType::rmmpc;
    throw ConfigError("unknown controller: " + std::string(name));
}

std::string controller_name(ControllerType t) {
    switch (t) {
        case ControllerType::pd: return "pd";
        case ControllerType::ac: return "ac";
        case ControllerType::mpc: return "mpc";
        case ControllerType::rmmpc: return "rmmpc";
    }
    return "?";
}

ControllerSpec ControllerSpec::defaults(ControllerType type) {
    ControllerSpec s;
    s.type = type;
    s.gains = ctrl::Gains::diagonal(2.0, 0.15);
    s.ac.gains = s.gains;
    s.ac.rate = 200.0;
    s.ac.a0 = -1.275;  // MMC-probability-weighted friction gain prior
    s.ac.a_max = 3.0;
    s.mpc = ctrl::MpcConfig::defaults();
    return s;
}

Vec3 slerp_heading(const Vec3& w_c, const Vec3& w_dc, double phi_th_deg) {
    const double phi = angle_between_deg(w_c, w_dc);
    if (phi <= phi_th_deg) return w_dc;
    if (phi > 179.0) {
        // Antipodal: the great circle is undefined; rotate toward a fixed
        // perpendicular of w_c instead.
        Vec3 axis = w_c.cross(Vec3::UnitZ());
        if (axis.norm() < 1e-6) axis = w_c.cross(Vec3::UnitX());
        const Vec3 perp = axis.normalized().cross(w_c).normalized();
        const double th = deg2rad(phi_th_deg);
        return std::cos(th) * w_c - std::sin(th) * perp;
    }
    const double sp = std::sin(deg2rad(phi));
    const Vec3 out = std::sin(deg2rad(phi - phi_th_deg)) / sp * w_c +
                     std::sin(deg2rad(phi_th_deg)) / sp * w_dc;
    return out.normalized();
}

Simulation::Simulation(const SimConfig& cfg)
    : cfg_(cfg),
      path_(cfg.key_points),
      plant_{cfg.physical, cfg.environment.rho_fric},
      scenarios_(ctrl::ScenarioSet::mmc_default(cfg.controller.scenario_R_max)),
      rng_(cfg.seed),
      adapt_{cfg.controller.ac.a0} {
    state_.p = path_.position(0.0);
    state_.v = Vec3::Zero();
    state_.heading = path_.tangent(0.0);
    const double duration =
        cfg_.max_duration_s > 0.0 ? cfg_.max_duration_s
                                  : 2.5 * path_.length() / cfg_.V_c + 60.0;
    max_steps_ = std::max(1, static_cast<int>(std::ceil(duration * cfg_.f_c)));
}

const StepLog& Simulation::step() {
    const double dt = 1.0 / cfg_.f_c;
    const double t = n_ * dt;
    StepLog rec;
    rec.t = t;
    rec.p_c = state_.p;
    rec.v_c = state_.v;
    rec.heading = state_.heading;

    // Controller dispatch.
    Vec3 f_d, w_dc;
    path::ReferencePoint nearest = path::nearest_point(path_, state_.p);
    const auto type = cfg_.controller.type;
    if (type == ControllerType::pd || type == ControllerType::ac) {
        w_dc = nearest.tangent;
        const Vec3 w_nc = slerp_heading(state_.heading, w_dc);
        const Vec3 v_d = path::desired_velocity(w_nc, cfg_.V_c);
        const Vec3 e = nearest.p_d - state_.p;
        const Vec3 e_dot = v_d - state_.v;
        if (type == ControllerType::pd) {
            f_d = ctrl::pd_force(e, e_dot, state_, plant_, cfg_.controller.gains);
        } else {
            auto [f, next_adapt] =
                ctrl::ac_force(e, e_dot, state_, plant_, cfg_.controller.ac, adapt_, dt);
            f_d = f;
            adapt_ = next_adapt;
        }
        rec.p_d = nearest.p_d;
    } else {
        const auto window = path::reference_sequence(path_, state_.p, cfg_.controller.mpc.N,
                                                     cfg_.V_c, cfg_.f_c);
        ctrl::MpcSolution sol;
        if (type == ControllerType::mpc) {
            sol = ctrl::mpc_solve(state_, window, cfg_.controller.mpc, plant_,
                                  warm_forces_.empty() ? nullptr : &warm_forces_);
        } else {
            sol = ctrl::rmmpc_solve(state_, window, cfg_.controller.mpc, plant_, scenarios_,
                                    warm_forces_.empty() ? nullptr : &warm_forces_);
        }
        f_d = sol.f_d;
        w_dc = window.velocities.front().normalized();
        rec.p_d = window.points.front().p_d;
        // Warm start for the next step: shift by one, repeat the tail.
        warm_forces_.assign(sol.f_seq.begin() + 1, sol.f_seq.end());
        warm_forces_.push_back(sol.f_seq.back());
    }

    // Heading limit and actuator pose.
    const Vec3 w_nc = slerp_heading(state_.heading, w_dc);
    rec.w_nc = w_nc;
    const auto pose = mag::solve_actuator_config(
        f_d, w_nc, cfg_.magnets,
        have_pose_ ? std::optional<mag::ActuatorConfig>(last_pose_) : std::nullopt,
        cfg_.pose_bounds);
    mag::ActuatorConfig applied_pose = pose.config;
    rec.pose_converged = pose.converged;
    rec.pose_residual = pose.residual;
    if (!pose.converged && have_pose_) applied_pose = last_pose_;  // keep last good pose
    last_pose_ = applied_pose;
    have_pose_ = true;

    // The plant receives the commanded force; the solved pose is the
    // hardware-facing actuator trajectory, with its fit residual logged.
    // Gravity compensation through the ±15° tilt cone alone cannot carry
    // the commanded lateral force, so driving the plant with the pose
    // force would wedge the capsule against static friction.
    const Vec3 f_applied = f_d;

    // Environment sample and plant update.
    const env::EnvSample es = env::env_sample(cfg_.environment, t, rng_);
    state_ = env::step_with_friction(state_, f_applied, es.f_dist,
                                     es.R * cfg_.environment.rho_fric, cfg_.physical, dt);

    rec.f_d = f_d;
    rec.f_applied = f_applied;
    rec.d = applied_pose.d;
    rec.alpha_deg = applied_pose.alpha_deg;
    rec.beta_deg = applied_pose.beta_deg;
    rec.phase = static_cast<int>(es.phase);
    rec.R = es.R;
    rec.s = nearest.s;
    rec.pos_err = (nearest.p_d - rec.p_c).norm();
    rec.ori_err_deg = angle_between_deg(rec.heading, nearest.tangent);
    log_.push_back(rec);

    ++n_;
    if (rec.pos_err > kDivergenceLimit) {
        diverged_ = true;
        done_ = true;
    }
    at_end_count_ = (nearest.s >= kCompletionS) ? at_end_count_ + 1 : 0;
    if (at_end_count_ >= kCompletionStreak || n_ >= max_steps_) done_ = true;
    return log_.back();
}

RunResult Simulation::finish() {
    RunResult r = compute_metrics(log_, path_);
    r.diverged = diverged_;
    r.completed = !diverged_ && at_end_count_ >= kCompletionStreak;
    return r;
}

RunResult run_simulation(const SimConfig& cfg) {
    Simulation sim(cfg);
    while (!sim.done()) sim.step();
    return sim.finish();
}

RunResult compute_metrics(std::vector<StepLog> log, const path::SplinePath& path) {
    RunResult r;
    r.log = std::move(log);
    if (r.log.empty()) return r;
    double sum_p = 0.0, sum_o = 0.0;
    for (const auto& rec : r.log) {
        sum_p += rec.pos_err;
        sum_o += rec.ori_err_deg;
        r.max_pos_err = std::max(r.max_pos_err, rec.pos_err);
        r.max_ori_err_deg = std::max(r.max_ori_err_deg, rec.ori_err_deg);
    }
    r.mean_pos_err = sum_p / r.log.size();
    r.mean_ori_err_deg = sum_o / r.log.size();
    const auto& first = r.log.front();
    const auto& last = r.log.back();
    const double elapsed = last.t - first.t;
    if (elapsed > 0.0)
        r.mean_speed = (path.arc_length(last.s) - path.arc_length(first.s)) / elapsed;
    r.completion_time_s = last.t + (r.log.size() > 1 ? r.log[1].t - r.log[0].t : 0.0);
    return r;
}

}  // namespace capsim::sim
