#include <doctest.h>

#include <cmath>

#include "capsim/errors.hpp"
#include "capsim/numopt.hpp"

using namespace capsim;
using namespace capsim::opt;

TEST_SUITE_BEGIN("numopt");

TEST_CASE("linear residual with inactive box hits the normal-equations solution") {
    Eigen::MatrixXd A(4, 2);
    A << 1, 2, 3, -1, 0.5, 0.5, -2, 1;
    Eigen::VectorXd b(4);
    b << 1, 0, 2, -1;

    BoundedLsqProblem p;
    p.residual = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return A * x - b; };
    p.lower = Eigen::Vector2d(-100, -100);
    p.upper = Eigen::Vector2d(100, 100);
    p.x0 = Eigen::Vector2d(5, -5);
    const auto r = least_squares_bounded(p);

    const Eigen::Vector2d direct = (A.transpose() * A).ldlt().solve(A.transpose() * b);
    CHECK((r.x - direct).norm() < 1e-8);
    CHECK(r.converged);
}

TEST_CASE("optimal start converges immediately") {
    BoundedLsqProblem p;
    p.residual = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd r(1);
        r[0] = x[0] * x[0];  // optimum at 0
        return r;
    };
    p.lower = Eigen::VectorXd::Constant(1, -1);
    p.upper = Eigen::VectorXd::Constant(1, 1);
    p.x0 = Eigen::VectorXd::Zero(1);
    const auto r = least_squares_bounded(p);
    CHECK(r.converged);
    CHECK(r.iterations <= 1);
    CHECK(r.x[0] == doctest::Approx(0.0));
}

TEST_CASE("active bound clamps the solution") {
    BoundedLsqProblem p;
    p.residual = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd r(1);
        r[0] = x[0] - 2.0;
        return r;
    };
    p.lower = Eigen::VectorXd::Constant(1, 0);
    p.upper = Eigen::VectorXd::Constant(1, 1);
    p.x0 = Eigen::VectorXd::Constant(1, 0.25);
    const auto r = least_squares_bounded(p);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.residual_norm == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("non-finite residual at the start throws") {
    BoundedLsqProblem p;
    p.residual = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd r(1);
        r[0] = std::sqrt(x[0] - 10.0);  // NaN on the box
        return r;
    };
    p.lower = Eigen::VectorXd::Constant(1, 0);
    p.upper = Eigen::VectorXd::Constant(1, 1);
    p.x0 = Eigen::VectorXd::Constant(1, 0.5);
    CHECK_THROWS_AS(least_squares_bounded(p), NonFiniteResidual);
}

TEST_CASE("monotone accepted steps") {
    // Rosenbrock-style residual; record the cost after each evaluation and
    // confirm the reported solution is at least as good as the start.
    BoundedLsqProblem p;
    p.residual = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::Vector2d r;
        r << 10 * (x[1] - x[0] * x[0]), 1 - x[0];
        return r;
    };
    p.lower = Eigen::Vector2d(-2, -2);
    p.upper = Eigen::Vector2d(2, 2);
    p.x0 = Eigen::Vector2d(-1.2, 1.0);
    const auto r = least_squares_bounded(p);
    const double start_norm = p.residual(p.x0).norm();
    CHECK(r.residual_norm <= start_norm);
    CHECK(r.residual_norm < 1e-6);  // unconstrained optimum is reachable
}

namespace {

// Simple double-integrator rollout used by the shooting tests (mass m, step
// dt, no friction): x = [p, v].
struct Rollout {
    double m = 0.01, dt = 0.1;
    Vec6 x0 = Vec6::Zero();

    Vec6 step(const Vec6& x, const Vec3& f) const {
        Vec6 n;
        const Vec3 a = f / m;
        n.tail<3>() = x.tail<3>() + a * dt;
        n.head<3>() = x.head<3>() + x.tail<3>() * dt + 0.5 * a * dt * dt;
        return n;
    }
};

}  // namespace

TEST_CASE("shooting horizon 1 without constraints is a weighted least-squares step") {
    Rollout ro;
    const Vec6 target = (Vec6() << 0.001, 0, 0, 0.01, 0, 0).finished();
    const Mat6 W = (Vec6() << 1e4, 1e4, 1e4, 1, 1, 1).finished().asDiagonal();

    ShootingNlp p;
    p.horizon = 1;
    p.f_max = 1e9;
    p.evaluate = [&](const std::vector<Vec3>& f, Eigen::VectorXd& res, std::vector<Vec6>& st) {
        const Vec6 x1 = ro.step(ro.x0, f[0]);
        st.assign(1, x1);
        res.resize(6);
        res = W.diagonal().cwiseSqrt().asDiagonal() * (target - x1);
    };
    const auto sol = solve_shooting_nlp(p, {Vec3::Zero()});

    // Direct solve: x1 = B f + c, minimize ‖W^1/2 (target - x1)‖.
    Eigen::Matrix<double, 6, 3> B = Eigen::Matrix<double, 6, 3>::Zero();
    B.block<3, 3>(0, 0) = 0.5 * ro.dt * ro.dt / ro.m * Mat3::Identity();
    B.block<3, 3>(3, 0) = ro.dt / ro.m * Mat3::Identity();
    const Vec6 c = ro.step(ro.x0, Vec3::Zero());
    const Eigen::MatrixXd Bw = W.diagonal().cwiseSqrt().asDiagonal() * B;
    const Eigen::VectorXd rhs =
        W.diagonal().cwiseSqrt().asDiagonal() * Eigen::VectorXd(target - c);
    const Vec3 direct = (Bw.transpose() * Bw).ldlt().solve(Bw.transpose() * rhs);

    CHECK((sol.forces[0] - direct).norm() < 1e-6);
    CHECK(sol.feasible);
}

TEST_CASE("1D double integrator, N=2, matches the hand-assembled QP") {
    Rollout ro;
    ro.x0 << 0.002, 0, 0, -0.005, 0, 0;
    const int N = 2;
    std::vector<Vec6> ref(N + 1, Vec6::Zero());
    ref[1] << 0.001, 0, 0, 0.003, 0, 0;
    ref[2] << 0.0013, 0, 0, 0.003, 0, 0;

    const Mat6 Wx = (Vec6() << 1e4, 1e4, 1e4, 1, 1, 1).finished().asDiagonal();
    const Mat6 Wn = 10.0 * Wx;
    const Mat3 Wf = 100.0 * Mat3::Identity();

    ShootingNlp p;
    p.horizon = N;
    p.f_max = 1e9;
    p.evaluate = [&](const std::vector<Vec3>& f, Eigen::VectorXd& res, std::vector<Vec6>& st) {
        st.clear();
        res.resize(6 * N + 3 * (N - 1));
        Vec6 x = ro.x0;
        int at = 0;
        for (int i = 1; i <= N; ++i) {
            x = ro.step(x, f[i - 1]);
            st.push_back(x);
            const Mat6& W = (i == N) ? Wn : Wx;
            res.segment<6>(at) = W.diagonal().cwiseSqrt().asDiagonal() * (ref[i] - x);
            at += 6;
        }
        for (int i = 0; i + 1 < N; ++i) {
            res.segment<3>(at) = Wf.diagonal().cwiseSqrt().asDiagonal() * (f[i + 1] - f[i]);
            at += 3;
        }
    };
    const auto sol = solve_shooting_nlp(p, {Vec3::Zero(), Vec3::Zero()});

    // Hand-assembled QP in the x components (y, z decouple and stay 0):
    // states x1 = A x0 + B f0, x2 = A x1 + B f1 with A = [[1, dt],[0, 1]],
    // B = [dt²/2m, dt/m]; quadratic cost in (f0, f1) minimized directly.
    const double dt = ro.dt, m = ro.m;
    Eigen::Matrix2d A;
    A << 1, dt, 0, 1;
    Eigen::Vector2d B(0.5 * dt * dt / m, dt / m);
    Eigen::Vector2d x0(ro.x0[0], ro.x0[3]);
    Eigen::Vector2d r1(ref[1][0], ref[1][3]), r2(ref[2][0], ref[2][3]);
    Eigen::Matrix2d Wx2 = Eigen::Vector2d(1e4, 1).asDiagonal();
    Eigen::Matrix2d Wn2 = 10.0 * Wx2;
    const double wf = 100.0;

    // x1 = A x0 + B f0; x2 = A² x0 + A B f0 + B f1.
    // e1 = r1 - x1 = (r1 - A x0) - B f0 ; e2 = (r2 - A² x0) - A B f0 - B f1.
    const Eigen::Vector2d c1 = r1 - A * x0;
    const Eigen::Vector2d c2 = r2 - A * A * x0;
    Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    // e1' Wx e1 with e1 = c1 - B f0.
    H(0, 0) += B.dot(Wx2 * B);
    g(0) += -B.dot(Wx2 * c1);
    // e2' Wn e2 with e2 = c2 - AB f0 - B f1.
    const Eigen::Vector2d AB = A * B;
    H(0, 0) += AB.dot(Wn2 * AB);
    H(0, 1) += AB.dot(Wn2 * B);
    H(1, 0) += B.dot(Wn2 * AB);
    H(1, 1) += B.dot(Wn2 * B);
    g(0) += -AB.dot(Wn2 * c2);
    g(1) += -B.dot(Wn2 * c2);
    // wf (f1 - f0)².
    H(0, 0) += wf;
    H(1, 1) += wf;
    H(0, 1) += -wf;
    H(1, 0) += -wf;
    const Eigen::Vector2d f_direct = H.ldlt().solve(-g);

    CHECK(sol.forces[0][0] == doctest::Approx(f_direct[0]).epsilon(1e-6));
    CHECK(sol.forces[1][0] == doctest::Approx(f_direct[1]).epsilon(1e-6));
    CHECK(std::abs(sol.forces[0][1]) < 1e-9);
    CHECK(std::abs(sol.forces[0][2]) < 1e-9);
}

TEST_CASE("force cap below the required compensation leaves forces on the bound") {
    Rollout ro;
    // Position and velocity targets both far out of reach: every residual
    // decreases monotonically in +x force, so the optimum saturates the cap.
    const Vec6 target = (Vec6() << 1.0, 0, 0, 5.0, 0, 0).finished();

    ShootingNlp p;
    p.horizon = 3;
    p.f_max = 0.02;  // far below what the target asks for
    p.evaluate = [&](const std::vector<Vec3>& f, Eigen::VectorXd& res, std::vector<Vec6>& st) {
        st.clear();
        res.resize(6 * 3);
        Vec6 x = ro.x0;
        for (int i = 0; i < 3; ++i) {
            x = ro.step(x, f[i]);
            st.push_back(x);
            res.segment<6>(6 * i) = 100.0 * (target - x);
        }
    };
    const auto sol = solve_shooting_nlp(p, std::vector<Vec3>(3, Vec3::Zero()));
    for (const auto& f : sol.forces) CHECK(f.norm() == doctest::Approx(0.02).epsilon(1e-9));
    CHECK(sol.feasible);
}

TEST_CASE("infeasible warm start is projected and reported") {
    Rollout ro;
    ShootingNlp p;
    p.horizon = 1;
    p.f_max = 0.1;
    p.evaluate = [&](const std::vector<Vec3>& f, Eigen::VectorXd& res, std::vector<Vec6>& st) {
        st.assign(1, ro.step(ro.x0, f[0]));
        res.resize(3);
        res = f[0];  // pull toward zero
    };
    const auto sol = solve_shooting_nlp(p, {Vec3(5, 0, 0)});
    CHECK(sol.infeasible_start);
    CHECK(sol.forces[0].norm() <= 0.1 + 1e-9);
}

TEST_CASE("shooting solver is deterministic") {
    Rollout ro;
    const Vec6 target = (Vec6() << 0.01, 0.002, -0.001, 0, 0, 0).finished();
    ShootingNlp p;
    p.horizon = 4;
    p.f_max = 0.5;
    p.evaluate = [&](const std::vector<Vec3>& f, Eigen::VectorXd& res, std::vector<Vec6>& st) {
        st.clear();
        res.resize(6 * 4);
        Vec6 x = ro.x0;
        for (int i = 0; i < 4; ++i) {
            x = ro.step(x, f[i]);
            st.push_back(x);
            res.segment<6>(6 * i) = 50.0 * (target - x);
        }
    };
    const auto a = solve_shooting_nlp(p, std::vector<Vec3>(4, Vec3::Zero()));
    const auto b = solve_shooting_nlp(p, std::vector<Vec3>(4, Vec3::Zero()));
    for (int i = 0; i < 4; ++i) CHECK((a.forces[i] - b.forces[i]).norm() == 0.0);
}

TEST_SUITE_END();
