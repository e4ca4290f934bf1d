// Capsule point-mass dynamics with dry friction, the MMC-modulated
// resistance model, bounded random disturbance, and the discrete integrator
// shared with the MPC prediction model.
#pragma once

#include <string_view>

#include "capsim/geometry.hpp"
#include "capsim/rng.hpp"

namespace capsim::env {

/// Below this speed the capsule is treated as stationary (stiction regime,
/// heading frozen).
inline constexpr double kVEps = 1e-4;  // m/s

enum class MmcPhase { I = 1, II = 2, III = 3, IV = 4 };

enum class MmcMode { constant, slow_varying, probabilistic };

struct CapsuleState {
    Vec3 p = Vec3::Zero();        // m
    Vec3 v = Vec3::Zero();        // m/s
    Vec3 heading = Vec3::UnitX();  // unit
};

struct PhysicalParams {
    double m_c = 0.010;  // kg
    double g = 9.81;     // m/s², along -z
};

struct EnvironmentModel {
    double rho_fric = 0.05;   // N
    double R_max = 2.0;       // >= 1
    double rho_dist = 0.0;    // N, disturbance ball radius
    MmcMode mmc_mode = MmcMode::constant;
    double slow_period_s = 120.0;  // slow_varying sinusoid period

    /// Presets env1..env4 (ideal / slowly varying R / MMC phases / MMC
    /// phases + 5 mN disturbance). Throws ConfigError on unknown names.
    static EnvironmentModel preset(std::string_view name);
};

/// Phase coefficient, R(t) or sampled parameters for one control step.
struct EnvSample {
    MmcPhase phase = MmcPhase::I;
    double R = 1.0;
    Vec3 f_dist = Vec3::Zero();
};

/// Kinetic dry friction, −rho·v/‖v‖; zero in the stiction regime (the
/// stiction force balance lives in step_with_friction, which needs the net
/// applied force).
Vec3 friction_force(const Vec3& v, double rho_fric);

/// MMC resistance multiplier: I -> 1, III -> R_max, II/IV -> midpoint.
double mmc_coefficient(MmcPhase phase, double R_max);

/// Phase draw with P(I) = 0.5, P(III) = 0.05, P(II) = P(IV) = 0.225.
MmcPhase sample_phase(Rng& rng);

/// Uniform sample from the ball of radius rho_dist.
Vec3 disturbance_sample(Rng& rng, double rho_dist);

/// Environmental resistance R·f_fric + f_dist (kinetic-regime law).
Vec3 env_force(const CapsuleState& state, const EnvironmentModel& model, MmcPhase phase,
               Rng& rng);

/// Phase/R/disturbance for one control step at time t.
EnvSample env_sample(const EnvironmentModel& model, double t, Rng& rng);

/// Constant-acceleration step: a = (f_applied + f_g + f_env)/m_c,
/// v' = v + a·dt, p' = p + v·dt + a·dt²/2; heading follows v' when moving.
CapsuleState step_dynamics(const CapsuleState& state, const Vec3& f_applied,
                           const Vec3& f_env, const PhysicalParams& params, double dt);

/// Friction-resolving step shared by the simulator and the MPC model Φ.
/// fric_budget is the available friction magnitude (R·rho_fric). Coulomb
/// friction is applied as an impulse on the frictionless end-of-step
/// velocity: exactly the kinetic law in straight-line motion, the stiction
/// balance at rest, and it can stop, but never reverse, the motion within
/// one step.
CapsuleState step_with_friction(const CapsuleState& state, const Vec3& f_applied,
                                const Vec3& f_dist, double fric_budget,
                                const PhysicalParams& params, double dt);

}  // namespace capsim::env
