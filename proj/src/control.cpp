#include "capsim/control.hpp"

#include <cmath>

#include "capsim/errors.hpp"
#include "capsim/numopt.hpp"

namespace capsim::ctrl {

Gains Gains::diagonal(double kp, double kd) {
    Gains g;
    g.K_P = kp * Mat3::Identity();
    g.K_D = kd * Mat3::Identity();
    g.validate();
    return g;
}

void Gains::validate() const {
    auto check = [](const Mat3& m, const char* name) {
        if (!m.isApprox(m.transpose(), 1e-12))
            throw Error(std::string(name) + " must be symmetric");
        Eigen::LLT<Mat3> llt(m);
        if (llt.info() != Eigen::Success)
            throw Error(std::string(name) + " must be positive definite");
    };
    check(K_P, "K_P");
    check(K_D, "K_D");
}

MpcConfig MpcConfig::defaults() {
    MpcConfig c;
    c.W_x = Mat6::Zero();
    c.W_x.topLeftCorner<3, 3>() = 1e4 * Mat3::Identity();
    c.W_x.bottomRightCorner<3, 3>() = Mat3::Identity();
    c.W_N = 10.0 * c.W_x;
    c.W_f = 10.0 * Mat3::Identity();
    return c;
}

ScenarioSet ScenarioSet::mmc_default(double R_max) {
    const double mid = 0.5 * (1.0 + R_max);
    ScenarioSet s;
    s.scenarios = {{1.0, 0.50}, {mid, 0.225}, {R_max, 0.05}, {mid, 0.225}};
    return s;
}

void ScenarioSet::validate() const {
    if (scenarios.empty()) throw Error("scenario set is empty");
    double total = 0.0;
    for (const auto& sc : scenarios) {
        if (sc.weight < 0.0) throw Error("scenario weight must be nonnegative");
        total += sc.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error("scenario weights must sum to 1");
}

namespace {

// Friction feedforward term. Kinetic law at speed; at rest the feedforward
// targets the friction that will oppose the commanded motion (v_desired),
// which keeps the push from collapsing inside the stiction dead zone.
Vec3 nominal_friction(const Vec3& v, const Vec3& v_desired, double rho) {
    if (v.norm() >= env::kVEps) return env::friction_force(v, rho);
    if (v_desired.norm() >= env::kVEps) return -rho * v_desired.normalized();
    return Vec3::Zero();
}

}  // namespace

Vec3 pd_force(const Vec3& e, const Vec3& e_dot, const env::CapsuleState& state,
              const PlantParams& params, const Gains& gains) {
    const Vec3 f_g(0.0, 0.0, -params.phys.m_c * params.phys.g);
    const Vec3 f_fric = nominal_friction(state.v, e_dot + state.v, params.rho_fric);
    return gains.K_P * e + gains.K_D * e_dot - f_g - f_fric;
}

std::pair<Vec3, AdaptiveState> ac_force(const Vec3& e, const Vec3& e_dot,
                                        const env::CapsuleState& state,
                                        const PlantParams& params, const AcConfig& cfg,
                                        AdaptiveState adapt, double dt) {
    const Vec3 f_g(0.0, 0.0, -params.phys.m_c * params.phys.g);
    // Force term and adaptation integrand share the regressor. Keeping it
    // alive at rest (via the commanded direction) matters: with a zero
    // at-rest regressor the accumulator only updates during catch-up
    // overspeed and integrates away from the friction estimate.
    const Vec3 f_fric = nominal_friction(state.v, e_dot + state.v, params.rho_fric);
    const Vec3 f = cfg.gains.K_P * e + cfg.gains.K_D * e_dot - f_g + adapt.a * f_fric;
    adapt.a = std::clamp(adapt.a + cfg.rate * e_dot.dot(f_fric) * dt, -cfg.a_max, cfg.a_max);
    return {f, adapt};
}

env::CapsuleState predict_state(const env::CapsuleState& x, const Vec3& f_d, double R,
                                const PlantParams& params, double dt) {
    return env::step_with_friction(x, f_d, Vec3::Zero(), R * params.rho_fric, params.phys, dt);
}

namespace {

Vec6 pack_state(const env::CapsuleState& s) {
    Vec6 x;
    x << s.p, s.v;
    return x;
}

// Symmetric PSD square root via eigendecomposition (weights are small and
// fixed per config, so this is assembled once per solve).
Mat6 sqrt_psd6(const Mat6& w) {
    Eigen::SelfAdjointEigenSolver<Mat6> eig(w);
    return eig.eigenvectors() *
           eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
           eig.eigenvectors().transpose();
}

Mat3 sqrt_psd3(const Mat3& w) {
    Eigen::SelfAdjointEigenSolver<Mat3> eig(w);
    return eig.eigenvectors() *
           eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
           eig.eigenvectors().transpose();
}

MpcSolution solve_impl(const env::CapsuleState& x_n, const path::ReferenceWindow& window,
                       const MpcConfig& cfg, const PlantParams& params,
                       const ScenarioSet& scenarios, const std::vector<Vec3>* warm_start) {
    const int N = cfg.N;
    if (static_cast<int>(window.points.size()) != N + 1)
        throw Error("reference window must hold N+1 points");
    scenarios.validate();

    // Scenarios sharing an R value produce identical rollouts; merge them so
    // the degenerate (all-equal) set follows the exact nominal-MPC path.
    ScenarioSet merged;
    double expected_R = 0.0;
    for (const auto& sc : scenarios.scenarios) {
        expected_R += sc.weight * sc.R;
        bool found = false;
        for (auto& m : merged.scenarios) {
            if (m.R == sc.R) {
                m.weight += sc.weight;
                found = true;
                break;
            }
        }
        if (!found && sc.weight > 0.0) merged.scenarios.push_back(sc);
    }
    if (merged.scenarios.size() == 1) merged.scenarios.front().weight = 1.0;

    const double dt = 1.0 / cfg.f_c;
    const int M = static_cast<int>(merged.scenarios.size());
    const Mat6 wx_sqrt = sqrt_psd6(cfg.W_x);
    const Mat6 wn_sqrt = sqrt_psd6(cfg.W_N);
    const Mat3 wf_sqrt = sqrt_psd3(cfg.W_f);

    std::vector<Vec6> x_ref(N + 1);
    for (int i = 0; i <= N; ++i) {
        x_ref[i] << window.points[i].p_d, window.velocities[i];
    }

    // Residual stack: per scenario sqrt(w_j)·W^{1/2}(x_d - x) for the stage
    // states i=1..N-1 and the terminal state, then the shared force-rate
    // terms. The i=0 error is constant in the decision variables.
    opt::ShootingNlp nlp;
    nlp.horizon = N;
    nlp.f_min = cfg.f_min;
    nlp.f_max = cfg.f_max;
    nlp.x_min = cfg.x_min;
    nlp.x_max = cfg.x_max;
    nlp.max_iter = cfg.max_iter;
    nlp.parallel_jacobian = cfg.parallel_jacobian;
    const int res_dim = M * 6 * N + 3 * std::max(0, N - 1);
    nlp.evaluate = [&, res_dim](const std::vector<Vec3>& forces, Eigen::VectorXd& res,
                                std::vector<Vec6>& states) {
        res.resize(res_dim);
        states.clear();
        states.reserve(M * N);
        int at = 0;
        for (int j = 0; j < M; ++j) {
            const auto& sc = merged.scenarios[j];
            const double sw = std::sqrt(sc.weight);
            env::CapsuleState x = x_n;
            for (int i = 1; i <= N; ++i) {
                x = predict_state(x, forces[i - 1], sc.R, params, dt);
                const Vec6 xi = pack_state(x);
                states.push_back(xi);
                const Vec6 err = x_ref[i] - xi;
                const Vec6 weighted = (i == N) ? Vec6(wn_sqrt * err) : Vec6(wx_sqrt * err);
                res.segment<6>(at) = sw * weighted;
                at += 6;
            }
        }
        for (int i = 0; i + 1 < N; ++i) {
            res.segment<3>(at) = wf_sqrt * (forces[i + 1] - forces[i]);
            at += 3;
        }
    };

    // Gravity plus the scenario-weighted friction along the first reference
    // tangent; a start guaranteed to push the rollouts off the stiction
    // plateau (where the cost is flat and the solver cannot move).
    const Vec3 f_g(0.0, 0.0, -params.phys.m_c * params.phys.g);
    const std::vector<Vec3> feedforward(
        N, Vec3(-f_g + expected_R * params.rho_fric * window.points.front().tangent));

    std::vector<Vec3> warm = feedforward;
    if (warm_start && !warm_start->empty()) {
        warm = *warm_start;
        warm.resize(N, warm.back());
    }

    opt::ShootingResult sol = opt::solve_shooting_nlp(nlp, warm);
    if (warm_start && x_n.v.norm() < env::kVEps) {
        // At rest the shifted warm start can sit inside the all-stuck flat
        // spot; retry from the breakaway feedforward and keep the better.
        opt::ShootingResult alt = opt::solve_shooting_nlp(nlp, feedforward);
        if (alt.objective < sol.objective) sol = std::move(alt);
    }
    MpcSolution out;
    out.f_seq = sol.forces;
    out.f_d = sol.forces.front();
    out.objective = sol.objective;
    out.converged = sol.converged;
    return out;
}

}  // namespace

MpcSolution mpc_solve(const env::CapsuleState& x_n, const path::ReferenceWindow& window,
                      const MpcConfig& cfg, const PlantParams& params,
                      const std::vector<Vec3>* warm_start) {
    ScenarioSet nominal;
    nominal.scenarios = {{1.0, 1.0}};
    return solve_impl(x_n, window, cfg, params, nominal, warm_start);
}

MpcSolution rmmpc_solve(const env::CapsuleState& x_n, const path::ReferenceWindow& window,
                        const MpcConfig& cfg, const PlantParams& params,
                        const ScenarioSet& scenarios, const std::vector<Vec3>* warm_start) {
    return solve_impl(x_n, window, cfg, params, scenarios, warm_start);
}

}  // namespace capsim::ctrl
