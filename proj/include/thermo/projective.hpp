// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "thermo/cocycle.hpp"
#include "thermo/common.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace thermo {

class ProjPoint {
public:
    ProjPoint() = default;

    explicit ProjPoint(const Vector& v) : rep_(v) {
        double n = rep_.norm();
        if (!(n > 0) || !std::isfinite(n)) throw Error(ErrorKind::InvalidArgument, "projective point from zero vector");
        rep_ /= n;
        for (Eigen::Index i = 0; i < rep_.size(); ++i) {
            if (rep_(i) != 0.0) {
                if (rep_(i) < 0) rep_ = -rep_;
                break;
            }
        }
    }

    static ProjPoint from_angle(double theta) {
        Vector v(2);
        v << std::cos(theta), std::sin(theta);
        return ProjPoint(v);
    }

    const Vector& rep() const { return rep_; }
    int dim() const { return int(rep_.size()); }

    // Angle in [0, pi); d = 2 only.
    double angle() const {
        if (rep_.size() != 2) throw Error(ErrorKind::DimensionUnsupported, "angle needs d = 2");
        double th = std::atan2(rep_(1), rep_(0));
        if (th < 0) th += std::numbers::pi;
        if (th >= std::numbers::pi) th -= std::numbers::pi;
        return th;
    }

private:
    Vector rep_;
};

// |u ^ v| for unit representatives. The wedge coordinates are summed directly;
// this equals sqrt(1 - <u,v>^2) by the Lagrange identity but keeps accuracy
// near coincident lines.
inline double dist(const ProjPoint& u, const ProjPoint& v) {
    const auto& a = u.rep();
    const auto& b = v.rep();
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = i + 1; j < a.size(); ++j) {
            double w = a(i) * b(j) - a(j) * b(i);
            s += w * w;
        }
    return std::min(1.0, std::sqrt(s));
}

inline double align(const ProjPoint& u, const ProjPoint& v) { return std::min(1.0, std::abs(u.rep().dot(v.rep()))); }

inline ProjPoint act(const Matrix& a, const ProjPoint& u) { return ProjPoint(Vector(a * u.rep())); }

constexpr double kDegenerateGap = 1e-10;

inline ProjPoint top_direction(const Matrix& a) {
    auto sd = singular(a);
    if (sd.values.size() < 2) return ProjPoint(Vector(sd.left.col(0)));
    if ((sd.values(0) - sd.values(1)) <= kDegenerateGap * sd.values(0))
        throw Error(ErrorKind::DegenerateGap, "top singular values coincide");
    return ProjPoint(Vector(sd.left.col(0)));
}

struct BqReport {
    double lower_i;   // ratio(v) - align(top(A*), v)
    double upper_i;   // align(top(A*), v) + gamma - ratio(v)
    double lower_ii;  // ratio*(u) - align(u, top(A))
    double upper_ii;  // align(u, top(A)) + gamma - ratio*(u)
    double iii;       // gamma - dist(A* u, top(A*)) * align(u, top(A))
    double gamma;

    double min_slack() const { return std::min({lower_i, upper_i, lower_ii, upper_ii, iii}); }
};

inline BqReport bq_inequalities_check(const Matrix& a, const ProjPoint& u, const ProjPoint& v) {
    auto sd = singular(a);
    double norm = sd.values(0);
    double gamma = sd.gap();
    Matrix at = a.transpose();
    ProjPoint top_a = top_direction(a);
    ProjPoint top_at = top_direction(at);
    double ratio_v = (a * v.rep()).norm() / norm;
    double ratio_u = (at * u.rep()).norm() / norm;
    BqReport r{};
    r.gamma = gamma;
    double av = align(top_at, v);
    r.lower_i = ratio_v - av;
    r.upper_i = av + gamma - ratio_v;
    double au = align(u, top_a);
    r.lower_ii = ratio_u - au;
    r.upper_ii = au + gamma - ratio_u;
    r.iii = gamma - dist(act(at, u), top_at) * au;
    return r;
}

struct XiEstimate {
    ProjPoint dir;
    std::size_t window = 0;
    double err_bound = 1.0;
};

// Top direction of A^[m](x); the gap of that matrix bounds the error.
inline XiEstimate estimate_xi_star(const OneStepCocycle& c, const Word& x_prefix, std::size_t m) {
    if (m < 1 || x_prefix.size() < m) throw Error(ErrorKind::InvalidArgument, "prefix shorter than window");
    Word head(x_prefix.begin(), x_prefix.begin() + std::ptrdiff_t(m));
    auto p = scaled_adjoint_product(c, head);
    XiEstimate out;
    out.dir = top_direction(p.m);
    out.window = m;
    out.err_bound = std::clamp(singular(p.m).gap(), std::numeric_limits<double>::min(), 1.0);
    return out;
}

// Doubles the window from m0 until err_bound < target or the window passes
// max_window or the prefix runs out; reports whatever was achieved.
inline XiEstimate estimate_xi_star_adaptive(const OneStepCocycle& c, const Word& x_prefix, std::size_t m0 = 30,
                                            double target = 1e-6, std::size_t max_window = 2000) {
    std::size_t m = std::min(m0, x_prefix.size());
    XiEstimate est = estimate_xi_star(c, x_prefix, m);
    while (est.err_bound >= target && 2 * m <= max_window && 2 * m <= x_prefix.size()) {
        m *= 2;
        est = estimate_xi_star(c, x_prefix, m);
    }
    return est;
}

} // namespace thermo
