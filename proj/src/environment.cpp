#include "capsim/environment.hpp"

#include <cmath>

#include "capsim/errors.hpp"

namespace capsim::env {

EnvironmentModel EnvironmentModel::preset(std::string_view name) {
    EnvironmentModel m;
    if (name == "env1") {
        m.mmc_mode = MmcMode::constant;
        m.rho_dist = 0.0;
    } else if (name == "env2") {
        m.mmc_mode = MmcMode::slow_varying;
        m.rho_dist = 0.0;
    } else if (name == "env3") {
        m.mmc_mode = MmcMode::probabilistic;
        m.rho_dist = 0.0;
    } else if (name == "env4") {
        m.mmc_mode = MmcMode::probabilistic;
        m.rho_dist = 0.005;
    } else {
        throw ConfigError("unknown environment preset: " + std::string(name));
    }
    return m;
}

Vec3 friction_force(const Vec3& v, double rho_fric) {
    const double speed = v.norm();
    if (speed < kVEps) return Vec3::Zero();
    return -rho_fric / speed * v;
}

double mmc_coefficient(MmcPhase phase, double R_max) {
    switch (phase) {
        case MmcPhase::I: return 1.0;
        case MmcPhase::III: return R_max;
        default: return 0.5 * (1.0 + R_max);
    }
}

MmcPhase sample_phase(Rng& rng) {
    const double u = rng.uniform();
    if (u < 0.50) return MmcPhase::I;
    if (u < 0.725) return MmcPhase::II;
    if (u < 0.775) return MmcPhase::III;
    return MmcPhase::IV;
}

Vec3 disturbance_sample(Rng& rng, double rho_dist) {
    if (rho_dist <= 0.0) {
        return Vec3::Zero();
    }
    return rng.ball(rho_dist);
}

Vec3 env_force(const CapsuleState& state, const EnvironmentModel& model, MmcPhase phase,
               Rng& rng) {
    return mmc_coefficient(phase, model.R_max) * friction_force(state.v, model.rho_fric) +
           disturbance_sample(rng, model.rho_dist);
}

EnvSample env_sample(const EnvironmentModel& model, double t, Rng& rng) {
    EnvSample s;
    switch (model.mmc_mode) {
        case MmcMode::constant:
            s.phase = MmcPhase::I;
            s.R = 1.0;
            break;
        case MmcMode::slow_varying:
            // R ramps 1 -> R_max -> 1 sinusoidally.
            s.phase = MmcPhase::I;
            s.R = 1.0 + (model.R_max - 1.0) * 0.5 *
                            (1.0 - std::cos(2.0 * kPi * t / model.slow_period_s));
            break;
        case MmcMode::probabilistic:
            s.phase = sample_phase(rng);
            s.R = mmc_coefficient(s.phase, model.R_max);
            break;
    }
    s.f_dist = disturbance_sample(rng, model.rho_dist);
    return s;
}

CapsuleState step_dynamics(const CapsuleState& state, const Vec3& f_applied,
                           const Vec3& f_env, const PhysicalParams& params, double dt) {
    const Vec3 f_g(0.0, 0.0, -params.m_c * params.g);
    const Vec3 a = (f_applied + f_g + f_env) / params.m_c;
    CapsuleState next;
    next.v = state.v + a * dt;
    next.p = state.p + state.v * dt + 0.5 * a * dt * dt;
    next.heading = (next.v.norm() >= kVEps) ? Vec3(next.v.normalized()) : state.heading;
    return next;
}

CapsuleState step_with_friction(const CapsuleState& state, const Vec3& f_applied,
                                const Vec3& f_dist, double fric_budget,
                                const PhysicalParams& params, double dt) {
    if (fric_budget <= 0.0) return step_dynamics(state, f_applied, f_dist, params, dt);

    const Vec3 f_g(0.0, 0.0, -params.m_c * params.g);
    const Vec3 f_nf = f_applied + f_g + f_dist;  // everything except friction

    // Coulomb friction resolved as an impulse on the frictionless
    // end-of-step velocity w: it removes up to fric_budget·dt/m of its
    // magnitude and sticks (exact rest) when the budget covers all of it.
    // For straight-line motion this is exactly the kinetic law; at rest it
    // is the stiction balance min(budget, ‖f_net‖); and friction alone can
    // stop, but never reverse, the motion within a step.
    const Vec3 w = state.v + (dt / params.m_c) * f_nf;
    const double wn = w.norm();
    const double drop = fric_budget * dt / params.m_c;
    const Vec3 v_next = (wn <= drop) ? Vec3::Zero() : Vec3((1.0 - drop / wn) * w);

    // Route through the shared integrator arithmetic.
    const Vec3 f_env = params.m_c / dt * (v_next - state.v) - f_nf + f_dist;
    return step_dynamics(state, f_applied, f_env, params, dt);
}

}  // namespace capsim::env
