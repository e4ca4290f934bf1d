#include "capsim/path.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "capsim/errors.hpp"

namespace capsim::path {

namespace {
constexpr int kGridSamples = 1024;   // coarse scan resolution
constexpr int kRefineStarts = 16;    // best grid cells refined locally
constexpr int kArcSamplesPerSeg = 64;
}  // namespace

SplinePath::SplinePath(std::vector<Vec3> key_points) : pts_(std::move(key_points)) {
    const int n = static_cast<int>(pts_.size());
    if (n < 2) throw Error("spline needs at least 2 key points");

    knots_.resize(n);
    knots_[0] = 0.0;
    for (int i = 1; i < n; ++i) {
        const double chord = (pts_[i] - pts_[i - 1]).norm();
        if (chord < 1e-12)
            throw DuplicateConsecutivePoints("consecutive key points coincide");
        knots_[i] = knots_[i - 1] + chord;
    }
    const double total = knots_.back();
    for (auto& t : knots_) t /= total;

    // Natural spline second derivatives: tridiagonal solve per coordinate,
    // M_0 = M_{n-1} = 0 (Thomas algorithm).
    second_derivs_.assign(n, Vec3::Zero());
    if (n > 2) {
        const int m = n - 2;
        std::vector<double> diag(m), upper(m), lowerv(m);
        std::vector<Vec3> rhs(m);
        for (int i = 1; i <= m; ++i) {
            const double h0 = knots_[i] - knots_[i - 1];
            const double h1 = knots_[i + 1] - knots_[i];
            lowerv[i - 1] = h0 / 6.0;
            diag[i - 1] = (h0 + h1) / 3.0;
            upper[i - 1] = h1 / 6.0;
            rhs[i - 1] = (pts_[i + 1] - pts_[i]) / h1 - (pts_[i] - pts_[i - 1]) / h0;
        }
        for (int i = 1; i < m; ++i) {
            const double w = lowerv[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        second_derivs_[m] = rhs[m - 1] / diag[m - 1];
        for (int i = m - 1; i >= 1; --i)
            second_derivs_[i] = (rhs[i - 1] - upper[i - 1] * second_derivs_[i + 1]) / diag[i - 1];
    }

    // Dense chord table for arc length, and a derivative sanity check.
    const int total_samples = (n - 1) * kArcSamplesPerSeg;
    arc_s_.resize(total_samples + 1);
    arc_table_.resize(total_samples + 1);
    arc_s_[0] = 0.0;
    arc_table_[0] = 0.0;
    Vec3 prev = position(0.0);
    double min_deriv = std::numeric_limits<double>::max();
    for (int k = 1; k <= total_samples; ++k) {
        const double s = static_cast<double>(k) / total_samples;
        const Vec3 p = position(s);
        arc_s_[k] = s;
        arc_table_[k] = arc_table_[k - 1] + (p - prev).norm();
        prev = p;
        min_deriv = std::min(min_deriv, derivative(s).norm());
    }
    min_deriv = std::min(min_deriv, derivative(0.0).norm());
    if (min_deriv < 1e-9 * total)
        throw ZeroVector("spline derivative vanishes along the path");
}

int SplinePath::segment_of(double s) const {
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), s);
    int i = static_cast<int>(it - knots_.begin()) - 1;
    return std::clamp(i, 0, static_cast<int>(knots_.size()) - 2);
}

Vec3 SplinePath::position(double s) const {
    s = std::clamp(s, 0.0, 1.0);
    const int i = segment_of(s);
    const double h = knots_[i + 1] - knots_[i];
    const double a = (knots_[i + 1] - s) / h;
    const double b = (s - knots_[i]) / h;
    return a * pts_[i] + b * pts_[i + 1] +
           ((a * a * a - a) * second_derivs_[i] + (b * b * b - b) * second_derivs_[i + 1]) *
               (h * h / 6.0);
}

Vec3 SplinePath::derivative(double s) const {
    s = std::clamp(s, 0.0, 1.0);
    const int i = segment_of(s);
    const double h = knots_[i + 1] - knots_[i];
    const double a = (knots_[i + 1] - s) / h;
    const double b = (s - knots_[i]) / h;
    return (pts_[i + 1] - pts_[i]) / h +
           (-(3.0 * a * a - 1.0) * second_derivs_[i] + (3.0 * b * b - 1.0) * second_derivs_[i + 1]) *
               (h / 6.0);
}

Vec3 SplinePath::tangent(double s) const {
    const Vec3 d = derivative(s);
    return d / d.norm();
}

double SplinePath::arc_length(double s) const {
    s = std::clamp(s, 0.0, 1.0);
    const auto it = std::upper_bound(arc_s_.begin(), arc_s_.end(), s);
    int k = static_cast<int>(it - arc_s_.begin()) - 1;
    k = std::clamp(k, 0, static_cast<int>(arc_s_.size()) - 2);
    const double frac = (s - arc_s_[k]) / (arc_s_[k + 1] - arc_s_[k]);
    return arc_table_[k] + frac * (arc_table_[k + 1] - arc_table_[k]);
}

namespace {

// Golden-section minimization of the squared distance on [lo, hi].
double refine_min(const SplinePath& path, const Vec3& q, double lo, double hi) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = (path.position(x1) - q).squaredNorm();
    double f2 = (path.position(x2) - q).squaredNorm();
    for (int it = 0; it < 80 && (b - a) > 1e-14; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = (path.position(x1) - q).squaredNorm();
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = (path.position(x2) - q).squaredNorm();
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

ReferencePoint nearest_point(const SplinePath& path, const Vec3& p_c) {
    // Coarse scan.
    std::array<std::pair<double, int>, kGridSamples + 1> scored;
    for (int k = 0; k <= kGridSamples; ++k) {
        const double s = static_cast<double>(k) / kGridSamples;
        scored[k] = {(path.position(s) - p_c).squaredNorm(), k};
    }
    std::array<std::pair<double, int>, kGridSamples + 1> best = scored;
    std::partial_sort(best.begin(), best.begin() + kRefineStarts, best.end());

    // Refine the best cells; ties resolve toward smaller s.
    double best_d2 = std::numeric_limits<double>::max();
    double best_s = 0.0;
    for (int i = 0; i < kRefineStarts; ++i) {
        const int k = best[i].second;
        const double lo = std::max(0.0, (k - 1.0) / kGridSamples);
        const double hi = std::min(1.0, (k + 1.0) / kGridSamples);
        const double s = refine_min(path, p_c, lo, hi);
        const double d2 = (path.position(s) - p_c).squaredNorm();
        const double tie = 1e-12 * std::max({d2, best_d2, 1e-30});
        if (d2 < best_d2 - tie || (std::abs(d2 - best_d2) <= tie && s < best_s)) {
            best_d2 = d2;
            best_s = s;
        }
    }
    // Endpoint clamp: the scan already includes s = 0 and s = 1.
    ReferencePoint rp;
    rp.s = best_s;
    rp.p_d = path.position(best_s);
    rp.tangent = path.tangent(best_s);
    return rp;
}

Vec3 desired_velocity(const Vec3& w_nc, double V_c) { return V_c * w_nc; }

ReferenceWindow reference_sequence(const SplinePath& path, const Vec3& p_c, int N,
                                   double V_c, double f_c) {
    ReferenceWindow w;
    w.points.reserve(N + 1);
    w.velocities.reserve(N + 1);

    ReferencePoint rp = nearest_point(path, p_c);
    w.points.push_back(rp);
    w.velocities.push_back(V_c * rp.tangent);
    for (int i = 0; i < N; ++i) {
        const Vec3 predicted = w.points.back().p_d + w.velocities.back() / f_c;
        rp = nearest_point(path, predicted);
        w.points.push_back(rp);
        w.velocities.push_back(V_c * rp.tangent);
    }
    return w;
}

}  // namespace capsim::path
