#include <doctest.h>

#include <cmath>

#include "capsim/environment.hpp"
#include "capsim/errors.hpp"
#include "capsim/rng.hpp"

using namespace capsim;
using namespace capsim::env;

TEST_SUITE_BEGIN("environment");

TEST_CASE("kinetic friction opposes motion at fixed magnitude") {
    const Vec3 f = friction_force({0.001, 0, 0}, 0.050);
    CHECK((f - Vec3(-0.050, 0, 0)).norm() < 1e-15);

    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const Vec3 v = rng.uniform(2e-4, 0.1) * rng.unit_vector();
        CHECK(friction_force(v, 0.05).norm() == doctest::Approx(0.05).epsilon(1e-12));
        CHECK(friction_force(v, 0.05).dot(v) < 0.0);
    }
    CHECK(friction_force(Vec3::Zero(), 0.05).norm() == 0.0);  // stiction regime
}

TEST_CASE("mmc coefficient table") {
    CHECK(mmc_coefficient(MmcPhase::I, 2.0) == 1.0);
    CHECK(mmc_coefficient(MmcPhase::III, 2.0) == 2.0);
    CHECK(mmc_coefficient(MmcPhase::II, 2.0) == 1.5);
    CHECK(mmc_coefficient(MmcPhase::IV, 2.0) == 1.5);
}

TEST_CASE("phase sampling frequencies") {
    Rng rng(123);
    const int n = 1000000;
    int counts[5] = {0, 0, 0, 0, 0};
    for (int i = 0; i < n; ++i) ++counts[static_cast<int>(sample_phase(rng))];
    CHECK(std::abs(counts[1] / double(n) - 0.50) < 0.005);
    CHECK(std::abs(counts[2] / double(n) - 0.225) < 0.005);
    CHECK(std::abs(counts[3] / double(n) - 0.05) < 0.005);
    CHECK(std::abs(counts[4] / double(n) - 0.225) < 0.005);
}

TEST_CASE("phase sampling is reproducible per seed") {
    Rng a(77), b(77);
    for (int i = 0; i < 1000; ++i) CHECK(sample_phase(a) == sample_phase(b));
}

TEST_CASE("constant mode is always phase I") {
    EnvironmentModel m = EnvironmentModel::preset("env1");
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        const auto s = env_sample(m, i * 0.1, rng);
        CHECK(s.phase == MmcPhase::I);
        CHECK(s.R == 1.0);
        CHECK(s.f_dist.norm() == 0.0);
    }
}

TEST_CASE("slow varying R spans [1, R_max] smoothly") {
    EnvironmentModel m = EnvironmentModel::preset("env2");
    Rng rng(1);
    double lo = 1e9, hi = -1e9, prev = -1;
    for (int i = 0; i <= 1200; ++i) {
        const auto s = env_sample(m, i * 0.1, rng);
        lo = std::min(lo, s.R);
        hi = std::max(hi, s.R);
        if (prev >= 0) CHECK(std::abs(s.R - prev) < 0.01);  // slow: |dR| small per step
        prev = s.R;
    }
    CHECK(lo == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(hi == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("disturbance samples stay inside the ball and average to zero") {
    Rng rng(9);
    CHECK(disturbance_sample(rng, 0.0).norm() == 0.0);
    Vec3 mean = Vec3::Zero();
    const int n = 1000000;
    const double rho = 0.005;
    for (int i = 0; i < n; ++i) {
        const Vec3 s = disturbance_sample(rng, rho);
        CHECK(s.norm() <= rho + 1e-15);
        mean += s;
    }
    mean /= n;
    // Component std is rho/sqrt(5); the mean of n samples scatters about
    // rho/sqrt(5n). 3 sigma.
    const double sigma = rho / std::sqrt(5.0 * n);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(mean[i]) < 3.0 * sigma);
}

TEST_CASE("env force composition and bound") {
    EnvironmentModel m;
    m.rho_fric = 0.05;
    m.R_max = 2.0;
    m.rho_dist = 0.0;
    CapsuleState st;
    st.v = {0.003, 0, 0};
    Rng rng(4);
    // Phase III, no disturbance: exactly R_max * friction.
    const Vec3 f = env_force(st, m, MmcPhase::III, rng);
    CHECK((f - Vec3(-0.10, 0, 0)).norm() < 1e-15);

    m.rho_dist = 0.005;
    for (int i = 0; i < 500; ++i) {
        const Vec3 fe = env_force(st, m, MmcPhase::III, rng);
        CHECK(fe.norm() <= m.R_max * m.rho_fric + m.rho_dist + 1e-12);
    }
}

TEST_CASE("step_dynamics ballistic and gravity cases") {
    PhysicalParams params;  // m_c = 0.010, g = 9.81
    CapsuleState st;
    st.p = {0.1, 0.2, 0.3};
    st.v = {0.01, -0.02, 0.005};

    // Zero net force: f_applied cancels gravity, pure drift.
    const Vec3 f_applied(0, 0, params.m_c * params.g);
    auto next = step_dynamics(st, f_applied, Vec3::Zero(), params, 0.1);
    CHECK((next.p - (st.p + st.v * 0.1)).norm() < 1e-15);
    CHECK((next.v - st.v).norm() < 1e-15);

    // Gravity only from rest: dz = -g dt²/2.
    CapsuleState rest;
    next = step_dynamics(rest, Vec3::Zero(), Vec3::Zero(), params, 0.1);
    CHECK(next.p.z() == doctest::Approx(-0.04905).epsilon(1e-12));
    CHECK(next.v.z() == doctest::Approx(-0.981).epsilon(1e-12));
}

TEST_CASE("step_dynamics constant-force trajectory telescopes to the closed form") {
    PhysicalParams params;
    const Vec3 f(0.02, -0.01, params.m_c * params.g + 0.005);
    const Vec3 a = (f + Vec3(0, 0, -params.m_c * params.g)) / params.m_c;
    CapsuleState st;
    st.v = {0.01, 0.02, 0};
    const double dt = 0.1;
    CapsuleState cur = st;
    for (int k = 1; k <= 50; ++k) {
        cur = step_dynamics(cur, f, Vec3::Zero(), params, dt);
        const double T = k * dt;
        const Vec3 exact_p = st.p + st.v * T + 0.5 * a * T * T;
        const Vec3 exact_v = st.v + a * T;
        CHECK((cur.p - exact_p).norm() < 1e-12);
        CHECK((cur.v - exact_v).norm() < 1e-12);
    }
}

TEST_CASE("heading follows velocity only when moving") {
    PhysicalParams params;
    CapsuleState st;
    st.heading = {1, 0, 0};
    st.v = {0, 0, 0};
    // Force cancels gravity, nudges +y: heading flips to +y once moving.
    auto next = step_dynamics(st, Vec3(0, 0.001, params.m_c * params.g), Vec3::Zero(), params, 0.1);
    CHECK((next.heading - Vec3(0, 1, 0)).norm() < 1e-12);

    // Below the dead-band the heading is retained.
    next = step_dynamics(st, Vec3(0, 1e-8, params.m_c * params.g), Vec3::Zero(), params, 0.1);
    CHECK((next.heading - Vec3(1, 0, 0)).norm() < 1e-12);
}

TEST_CASE("stiction cancels sub-threshold loads") {
    PhysicalParams params;
    params.g = 0.0;  // isolate friction
    CapsuleState st;  // at rest
    const auto next = step_with_friction(st, Vec3(0.02, 0, 0), Vec3::Zero(), 0.05, params, 0.1);
    CHECK(next.v.norm() == 0.0);
    CHECK((next.p - st.p).norm() == 0.0);
}

TEST_CASE("breakaway from rest under super-threshold loads") {
    PhysicalParams params;
    params.g = 0.0;
    CapsuleState st;
    const auto next = step_with_friction(st, Vec3(0.08, 0, 0), Vec3::Zero(), 0.05, params, 0.1);
    // Net 0.03 N on 10 g for 0.1 s.
    CHECK(next.v.x() == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("friction never increases speed") {
    PhysicalParams params;
    params.g = 0.0;
    Rng rng(31);
    for (int i = 0; i < 500; ++i) {
        CapsuleState st;
        st.v = rng.uniform(0.0, 0.02) * rng.unit_vector();
        const auto next =
            step_with_friction(st, Vec3::Zero(), Vec3::Zero(), rng.uniform(0.0, 0.1), params, 0.1);
        CHECK(next.v.norm() <= st.v.norm() + 1e-15);
    }
}

TEST_CASE("moving capsule sticks when friction beats the load within a step") {
    PhysicalParams params;
    params.g = 0.0;
    CapsuleState st;
    st.v = {0.003, 0, 0};
    // Load below budget, friction stops the capsule mid-step.
    const auto next = step_with_friction(st, Vec3(0.02, 0, 0), Vec3::Zero(), 0.05, params, 0.1);
    CHECK(next.v.norm() < 1e-15);
    // Position advances roughly half a step of the initial velocity.
    CHECK(next.p.x() == doctest::Approx(0.5 * 0.003 * 0.1).epsilon(1e-9));
}

TEST_CASE("straight-line kinetic regime matches the Coulomb-law integrator step") {
    PhysicalParams params;
    CapsuleState st;
    st.v = {0.05, 0, 0};  // fast enough not to stop in one step
    const Vec3 f_applied(0.2, 0, params.m_c * params.g);  // aligned with v
    const double budget = 0.05;
    const auto a = step_with_friction(st, f_applied, Vec3::Zero(), budget, params, 0.01);
    const Vec3 fric = -budget * st.v.normalized();
    const auto b = step_dynamics(st, f_applied, fric, params, 0.01);
    CHECK((a.p - b.p).norm() < 1e-15);
    CHECK((a.v - b.v).norm() < 1e-14);
}

TEST_CASE("environment presets") {
    CHECK(EnvironmentModel::preset("env1").mmc_mode == MmcMode::constant);
    CHECK(EnvironmentModel::preset("env2").mmc_mode == MmcMode::slow_varying);
    CHECK(EnvironmentModel::preset("env3").mmc_mode == MmcMode::probabilistic);
    const auto e4 = EnvironmentModel::preset("env4");
    CHECK(e4.mmc_mode == MmcMode::probabilistic);
    CHECK(e4.rho_dist == doctest::Approx(0.005));
    CHECK_THROWS_AS(EnvironmentModel::preset("env9"), ConfigError);
}

TEST_SUITE_END();
