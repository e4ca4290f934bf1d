// Closed-loop orchestration: reference generation, controller dispatch,
// SLERP heading limiting, actuator pose solve, plant step, and run metrics.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "capsim/control.hpp"
#include "capsim/environment.hpp"
#include "capsim/magnetics.hpp"
#include "capsim/path.hpp"

namespace capsim::sim {

enum class ControllerType { pd, ac, mpc, rmmpc };

ControllerType controller_from_name(std::string_view name);
std::string controller_name(ControllerType t);

struct ControllerSpec {
    ControllerType type = ControllerType::pd;
    ctrl::Gains gains;        // PD / AC feedback gains
    ctrl::AcConfig ac;        // AC extras (rate, a0, a_max)
    ctrl::MpcConfig mpc;      // MPC / RMMPC
    double scenario_R_max = 2.0;  // RMMPC scenario spread

    /// Tuned defaults shared by every experiment preset.
    static ControllerSpec defaults(ControllerType type);
};

struct SimConfig {
    std::vector<Vec3> key_points;
    env::EnvironmentModel environment;
    ControllerSpec controller;
    env::PhysicalParams physical;
    mag::MagnetParams magnets = mag::MagnetParams::hardware_defaults();
    mag::PoseBounds pose_bounds;
    double V_c = 0.003;  // m/s
    double f_c = 10.0;   // Hz
    double max_duration_s = 0.0;  // 0 -> auto from path length
    uint64_t seed = 0;
};

struct StepLog {
    double t = 0.0;
    Vec3 p_c, v_c, heading, p_d, f_d;
    double d = 0.0, alpha_deg = 0.0, beta_deg = 0.0;
    int phase = 1;
    double R = 1.0;
    double pos_err = 0.0;      // m
    double ori_err_deg = 0.0;
    // Diagnostics, not part of the CSV schema.
    double s = 0.0;
    Vec3 w_nc = Vec3::UnitX();
    Vec3 f_applied = Vec3::Zero();  // force driving the plant this step
    double pose_residual = 0.0;      // ‖f_d − f(pose)‖, N
    bool pose_converged = true;
};

struct RunResult {
    std::vector<StepLog> log;
    double mean_pos_err = 0.0, max_pos_err = 0.0;       // m
    double mean_ori_err_deg = 0.0, max_ori_err_deg = 0.0;
    double mean_speed = 0.0;                             // m/s along the path
    double completion_time_s = 0.0;
    bool completed = false;
    bool diverged = false;
};

/// SLERP-limited next heading: returns w_dc when the angle to it is within
/// the threshold, otherwise the point 45° along the great circle from w_c
/// toward w_dc. Near-antipodal pairs fall back to a fixed perpendicular.
Vec3 slerp_heading(const Vec3& w_c, const Vec3& w_dc, double phi_th_deg = 45.0);

/// One simulation run; owns controller state and the RNG stream.
class Simulation {
public:
    explicit Simulation(const SimConfig& cfg);

    /// Executes one control step (Algorithm 1 dispatch + plant update) and
    /// returns its log record.
    const StepLog& step();

    /// Replace the capsule state (scenario setup, tests).
    void set_state(const env::CapsuleState& s) { state_ = s; }

    bool done() const { return done_; }
    bool diverged() const { return diverged_; }
    const env::CapsuleState& state() const { return state_; }
    const path::SplinePath& spline() const { return path_; }
    const std::vector<StepLog>& log() const { return log_; }
    int max_steps() const { return max_steps_; }

    RunResult finish();

private:
    SimConfig cfg_;
    path::SplinePath path_;
    ctrl::PlantParams plant_;
    ctrl::ScenarioSet scenarios_;
    env::CapsuleState state_;
    Rng rng_;
    ctrl::AdaptiveState adapt_;
    std::vector<Vec3> warm_forces_;
    mag::ActuatorConfig last_pose_;
    bool have_pose_ = false;
    std::vector<StepLog> log_;
    int n_ = 0;
    int max_steps_ = 0;
    int at_end_count_ = 0;
    bool done_ = false;
    bool diverged_ = false;
};

RunResult run_simulation(const SimConfig& cfg);

/// Aggregate metrics over a step log (position/orientation errors, mean
/// progress speed along the path).
RunResult compute_metrics(std::vector<StepLog> log, const path::SplinePath& path);

}  // namespace capsim::sim
