#include "capsim/numopt.hpp"

#include <cmath>
#include <limits>

#include "capsim/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace capsim::opt {

namespace {

Eigen::VectorXd clamp_box(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                          const Eigen::VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

// Central-difference Jacobian with per-variable relative steps.
Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, int m) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd jac(m, n);
    for (int j = 0; j < n; ++j) {
        const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return jac;
}

}  // namespace

LsqResult least_squares_bounded(const BoundedLsqProblem& p) {
    Eigen::VectorXd x = clamp_box(p.x0, p.lower, p.upper);
    Eigen::VectorXd r = p.residual(x);
    if (!r.allFinite()) throw NonFiniteResidual("least_squares_bounded: non-finite residual at x0");

    const int m = static_cast<int>(r.size());
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;

    auto eval_cost = [&](const Eigen::VectorXd& cand) -> double {
        const Eigen::VectorXd rc = p.residual(cand);
        return rc.allFinite() ? rc.squaredNorm() : std::numeric_limits<double>::infinity();
    };

    for (; iter < p.max_iter; ++iter) {
        const Eigen::MatrixXd jac = fd_jacobian(p.residual, x, m);
        const Eigen::VectorXd grad = jac.transpose() * r;
        if (grad.lpNorm<Eigen::Infinity>() < 1e-14 * std::max(1.0, cost)) {
            converged = true;
            break;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;

        // Candidates from the current iterate: the first improving damped
        // step, the projected Cauchy point, and a projected-gradient
        // backtracking sweep as a last resort.
        Eigen::VectorXd best_x;
        double best_cost = cost;
        while (lambda <= 1e12) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            const Eigen::VectorXd cand = clamp_box(x + damped.ldlt().solve(-grad), p.lower, p.upper);
            const double c = eval_cost(cand);
            if (c < cost) {
                best_x = cand;
                best_cost = c;
                lambda = std::max(lambda / 3.0, 1e-12);
                break;
            }
            lambda *= 4.0;
        }
        const double gBg = (jac * grad).squaredNorm();
        if (gBg > 0.0) {
            const Eigen::VectorXd cand =
                clamp_box(x - (grad.squaredNorm() / gBg) * grad, p.lower, p.upper);
            const double c = eval_cost(cand);
            if (c < best_cost) {
                best_x = cand;
                best_cost = c;
            }
        }
        if (best_cost >= cost) {
            double tau = 1.0 / std::max(grad.lpNorm<Eigen::Infinity>(), 1e-12);
            for (int k = 0; k < 60; ++k, tau *= 0.5) {
                const Eigen::VectorXd cand = clamp_box(x - tau * grad, p.lower, p.upper);
                const double c = eval_cost(cand);
                if (c < cost) {
                    best_x = cand;
                    best_cost = c;
                    break;
                }
            }
        }
        if (best_cost >= cost) {
            converged = true;  // projected-stationary
            break;
        }
        const double moved = (best_x - x).norm();
        x = best_x;
        cost = best_cost;
        r = p.residual(x);
        if (moved < p.step_tol) {
            converged = true;
            break;
        }
    }

    return {x, std::sqrt(cost), converged, iter};
}

namespace {

// Flatten/unflatten between the force sequence and the decision vector.
Eigen::VectorXd pack(const std::vector<Vec3>& f) {
    Eigen::VectorXd x(3 * f.size());
    for (size_t i = 0; i < f.size(); ++i) x.segment<3>(3 * i) = f[i];
    return x;
}

std::vector<Vec3> unpack(const Eigen::VectorXd& x) {
    std::vector<Vec3> f(x.size() / 3);
    for (size_t i = 0; i < f.size(); ++i) f[i] = x.segment<3>(3 * i);
    return f;
}

// Project every force onto the annulus f_min <= ‖f‖ <= f_max. For f_min > 0
// the projection of a near-zero force is ill-posed; we pick +x
// deterministically (f_min defaults to 0, where this never triggers).
void project_annulus(std::vector<Vec3>& f, double f_min, double f_max) {
    for (auto& v : f) {
        const double n = v.norm();
        if (n > f_max) {
            v *= f_max / n;
        } else if (n < f_min) {
            v = (n < 1e-15) ? Vec3(f_min, 0, 0) : Vec3(v * (f_min / n));
        }
    }
}

double box_violation(const std::vector<Vec6>& states, const Vec6& lo, const Vec6& hi) {
    double worst = 0.0;
    for (const auto& s : states) {
        worst = std::max(worst, (lo - s).maxCoeff());
        worst = std::max(worst, (s - hi).maxCoeff());
    }
    return std::max(worst, 0.0);
}

}  // namespace

ShootingResult solve_shooting_nlp(const ShootingNlp& p, const std::vector<Vec3>& warm_start) {
    const int n_forces = p.horizon;
    std::vector<Vec3> forces = warm_start;
    forces.resize(n_forces, warm_start.empty() ? Vec3::Zero() : warm_start.back());

    ShootingResult out;
    {
        std::vector<Vec3> projected = forces;
        project_annulus(projected, p.f_min, p.f_max);
        for (int i = 0; i < n_forces; ++i)
            if ((projected[i] - forces[i]).norm() > 1e-9) out.infeasible_start = true;
        forces = projected;
    }

    // Escalating quadratic penalty on state-box violations; with the default
    // (effectively unbounded) box the first round already satisfies it.
    double mu = 1e4;
    constexpr int kPenaltyRounds = 6;
    constexpr double kFeasTol = 1e-6;

    std::vector<Vec6> states;

    auto eval_full = [&](const std::vector<Vec3>& f, Eigen::VectorXd& res,
                         std::vector<Vec6>& st, double penalty_mu) {
        p.evaluate(f, res, st);
        double extra = 0.0;
        for (const auto& s : st) {
            const Vec6 lo_v = (p.x_min - s).cwiseMax(0.0);
            const Vec6 hi_v = (s - p.x_max).cwiseMax(0.0);
            extra += lo_v.squaredNorm() + hi_v.squaredNorm();
        }
        if (extra > 0.0) {
            res.conservativeResize(res.size() + 1);
            res[res.size() - 1] = std::sqrt(penalty_mu * extra);
        }
    };

    int total_iter = 0;
    for (int round = 0; round < kPenaltyRounds; ++round) {
        Eigen::VectorXd x = pack(forces);
        Eigen::VectorXd r;
        eval_full(forces, r, states, mu);
        if (!r.allFinite()) throw NonFiniteResidual("solve_shooting_nlp: non-finite residual at start");
        double cost = r.squaredNorm();
        double lambda = 1e-3;
        const int dim = static_cast<int>(x.size());

        struct Candidate {
            Eigen::VectorXd x, r;
            std::vector<Vec6> states;
            double cost = std::numeric_limits<double>::infinity();
        };
        auto make_candidate = [&](const Eigen::VectorXd& raw) {
            Candidate c;
            std::vector<Vec3> f = unpack(raw);
            project_annulus(f, p.f_min, p.f_max);
            eval_full(f, c.r, c.states, mu);
            c.cost = c.r.allFinite() ? c.r.squaredNorm() : std::numeric_limits<double>::infinity();
            c.x = pack(f);
            return c;
        };

        bool converged = false;
        for (int iter = 0; iter < p.max_iter && !converged; ++iter, ++total_iter) {
            // Forward-difference Jacobian; columns are independent, so the
            // loop parallelizes without changing results.
            const int m = static_cast<int>(r.size());
            Eigen::MatrixXd jac(m, dim);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (p.parallel_jacobian)
#endif
            for (int j = 0; j < dim; ++j) {
                const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
                Eigen::VectorXd xp = x;
                xp[j] += h;
                Eigen::VectorXd rp;
                std::vector<Vec6> st;
                eval_full(unpack(xp), rp, st, mu);
                if (rp.size() == m) {
                    jac.col(j) = (rp - r) / h;
                } else {
                    // Penalty residual appeared/vanished across the step;
                    // pad the missing entry with zero.
                    Eigen::VectorXd padded = Eigen::VectorXd::Zero(m);
                    const int keep = std::min<int>(m, static_cast<int>(rp.size()));
                    padded.head(keep) = rp.head(keep);
                    jac.col(j) = (padded - r) / h;
                }
            }

            const Eigen::VectorXd grad = jac.transpose() * r;
            // Relative test keeps the stopping decisions invariant under a
            // uniform rescaling of the residual weights.
            if (grad.lpNorm<Eigen::Infinity>() <= 1e-12 * cost) {
                converged = true;
                break;
            }
            const Eigen::MatrixXd jtj = jac.transpose() * jac;

            Candidate best;
            while (lambda <= 1e12) {
                Eigen::MatrixXd damped = jtj;
                damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
                Candidate c = make_candidate(x + damped.ldlt().solve(-grad));
                if (c.cost < cost) {
                    best = std::move(c);
                    lambda = std::max(lambda / 3.0, 1e-12);
                    break;
                }
                lambda *= 4.0;
            }
            const double gBg = (jac * grad).squaredNorm();
            if (gBg > 0.0) {
                Candidate c = make_candidate(x - (grad.squaredNorm() / gBg) * grad);
                if (c.cost < best.cost && c.cost < cost) best = std::move(c);
            }
            if (best.cost >= cost) {
                double tau = 1.0 / std::max(grad.lpNorm<Eigen::Infinity>(), 1e-12);
                for (int k = 0; k < 60; ++k, tau *= 0.5) {
                    Candidate c = make_candidate(x - tau * grad);
                    if (c.cost < cost) {
                        best = std::move(c);
                        break;
                    }
                }
            }
            if (best.cost >= cost) {
                converged = true;  // projected-stationary
                break;
            }
            const double moved = (best.x - x).norm();
            x = best.x;
            r = best.r;
            states = best.states;
            cost = best.cost;
            if (moved < p.step_tol) converged = true;
        }
        out.converged = converged;

        forces = unpack(x);
        if (box_violation(states, p.x_min, p.x_max) <= kFeasTol) break;
        mu *= 10.0;
    }

    // Post-hoc constraint audit, independent of the solve path.
    Eigen::VectorXd r_final;
    p.evaluate(forces, r_final, states);
    out.objective = r_final.squaredNorm();
    out.feasible = box_violation(states, p.x_min, p.x_max) <= kFeasTol;
    for (const auto& f : forces) {
        const double n = f.norm();
        if (n > p.f_max + kFeasTol || n < p.f_min - kFeasTol) out.feasible = false;
    }
    out.forces = std::move(forces);
    out.iterations = total_iter;
    return out;
}

}  // namespace capsim::opt
