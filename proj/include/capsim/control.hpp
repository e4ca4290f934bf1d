// The four force controllers: PD and adaptive feedback laws, and the
// predictive controllers (nominal MPC and the scenario-weighted robust
// multi-stage MPC) built on the shooting solver.
#pragma once

#include <utility>
#include <vector>

#include "capsim/environment.hpp"
#include "capsim/geometry.hpp"
#include "capsim/path.hpp"

namespace capsim::ctrl {

/// Positive-definite feedback gains; construction verifies SPD.
struct Gains {
    Mat3 K_P = Mat3::Identity();
    Mat3 K_D = Mat3::Identity();

    static Gains diagonal(double kp, double kd);
    void validate() const;  // throws Error unless both are symmetric PD
};

/// Nominal plant model shared by all controllers (mass, gravity and the
/// unit-R friction magnitude).
struct PlantParams {
    env::PhysicalParams phys;
    double rho_fric = 0.05;
};

struct AdaptiveState {
    double a = 0.0;  // gain on f_fric, clamped to ±a_max
};

struct AcConfig {
    Gains gains;
    double rate = 1.0;    // adaptation rate multiplying the update integrand
    double a0 = 0.0;      // initial accumulator
    double a_max = 3.0;   // anti-windup clamp
};

struct MpcConfig {
    int N = 10;            // prediction horizon
    double f_c = 10.0;     // control frequency, Hz
    Mat6 W_N, W_x;         // terminal / stage state-error weights (PSD)
    Mat3 W_f;              // force-rate weight (PSD)
    Vec6 x_min = Vec6::Constant(-1e30);
    Vec6 x_max = Vec6::Constant(1e30);
    double f_min = 0.0, f_max = 0.5;  // N
    int max_iter = 40;
    bool parallel_jacobian = false;

    static MpcConfig defaults();
};

struct Scenario {
    double R = 1.0;
    double weight = 1.0;
};

/// Scenario set for the robust horizon (one branching step). Weights must
/// sum to 1.
struct ScenarioSet {
    std::vector<Scenario> scenarios;

    /// The four MMC phases at their occurrence probabilities:
    /// R = {1, (1+R_max)/2, R_max, (1+R_max)/2}, w = {.5, .225, .05, .225}.
    static ScenarioSet mmc_default(double R_max);
    void validate() const;
};

struct MpcSolution {
    std::vector<Vec3> f_seq;
    Vec3 f_d = Vec3::Zero();  // first element of f_seq
    double objective = 0.0;
    bool converged = false;
};

/// PD law with gravity and nominal (R = 1) friction feedforward.
Vec3 pd_force(const Vec3& e, const Vec3& e_dot, const env::CapsuleState& state,
              const PlantParams& params, const Gains& gains);

/// Adaptive law: gravity feedforward plus an adapted friction gain,
/// a' = clamp(a + rate·(ė·f_fric)·dt, ±a_max).
std::pair<Vec3, AdaptiveState> ac_force(const Vec3& e, const Vec3& e_dot,
                                        const env::CapsuleState& state,
                                        const PlantParams& params, const AcConfig& cfg,
                                        AdaptiveState adapt, double dt);

/// One-step prediction model Φ: step_with_friction with no disturbance.
env::CapsuleState predict_state(const env::CapsuleState& x, const Vec3& f_d, double R,
                                const PlantParams& params, double dt);

/// Nominal MPC (R = 1, no disturbance) over the reference window.
MpcSolution mpc_solve(const env::CapsuleState& x_n, const path::ReferenceWindow& window,
                      const MpcConfig& cfg, const PlantParams& params,
                      const std::vector<Vec3>* warm_start = nullptr);

/// Robust multi-stage MPC: one shared force sequence scored across the R
/// scenarios with their weights.
MpcSolution rmmpc_solve(const env::CapsuleState& x_n, const path::ReferenceWindow& window,
                        const MpcConfig& cfg, const PlantParams& params,
                        const ScenarioSet& scenarios,
                        const std::vector<Vec3>* warm_start = nullptr);

}  // namespace capsim::ctrl
