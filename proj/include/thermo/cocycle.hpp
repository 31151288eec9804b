// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "thermo/common.hpp"
#include "thermo/sft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

namespace thermo {

struct SingularData {
    Vector values;  // descending
    Matrix left;    // columns are left singular vectors
    Matrix right;   // columns are right singular vectors

    double norm() const { return values(0); }
    double gap() const { return values.size() > 1 ? values(1) / values(0) : 0.0; }
};

// One-sided Jacobi SVD.
inline SingularData singular(const Matrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0) throw Error(ErrorKind::InvalidArgument, "singular expects a square matrix");
    const Eigen::Index d = a.rows();
    Matrix w = a;
    Matrix v = Matrix::Identity(d, d);
    constexpr double eps = 1e-15;
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (Eigen::Index p = 0; p + 1 < d; ++p) {
            for (Eigen::Index r = p + 1; r < d; ++r) {
                double alpha = w.col(p).squaredNorm();
                double beta = w.col(r).squaredNorm();
                double gamma = w.col(p).dot(w.col(r));
                if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
                rotated = true;
                double zeta = (beta - alpha) / (2.0 * gamma);
                double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
                double c = 1.0 / std::hypot(1.0, t);
                double s = c * t;
                for (Eigen::Index i = 0; i < d; ++i) {
                    double wp = w(i, p), wr = w(i, r);
                    w(i, p) = c * wp - s * wr;
                    w(i, r) = s * wp + c * wr;
                    double vp = v(i, p), vr = v(i, r);
                    v(i, p) = c * vp - s * vr;
                    v(i, r) = s * vp + c * vr;
                }
            }
        }
        if (!rotated) break;
    }
    std::vector<Eigen::Index> order(d);
    std::iota(order.begin(), order.end(), 0);
    Vector norms(d);
    for (Eigen::Index i = 0; i < d; ++i) norms(i) = w.col(i).norm();
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return norms(x) > norms(y); });
    SingularData out;
    out.values.resize(d);
    out.left.resize(d, d);
    out.right.resize(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        auto i = order[k];
        out.values(k) = norms(i);
        out.left.col(k) = norms(i) > 0 ? Vector(w.col(i) / norms(i)) : Vector(Vector::Unit(d, k));
        out.right.col(k) = v.col(i);
    }
    return out;
}

// Closed form for 2x2, Jacobi otherwise.
inline double spectral_norm(const Matrix& a) {
    if (a.rows() == 2 && a.cols() == 2) {
        double s1 = std::hypot(a(0, 0) + a(1, 1), a(1, 0) - a(0, 1));
        double s2 = std::hypot(a(0, 0) - a(1, 1), a(1, 0) + a(0, 1));
        return 0.5 * (s1 + s2);
    }
    return singular(a).values(0);
}

inline double min_singular_value(const Matrix& a) {
    if (a.rows() == 2 && a.cols() == 2) {
        double n = spectral_norm(a);
        return n > 0 ? std::abs(a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) / n : 0.0;
    }
    return singular(a).values(a.rows() - 1);
}

inline double wedge_log_norm(const Matrix& a) {
    if (a.rows() < 2) throw Error(ErrorKind::InvalidArgument, "wedge_log_norm needs d >= 2");
    if (a.rows() == 2) {
        double n = spectral_norm(a);
        double det = std::abs(a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0));
        return std::log(n) + std::log(det / n);
    }
    auto sd = singular(a);
    return std::log(sd.values(0)) + std::log(sd.values(1));
}

// 2^exp2 * m. Rescaling by exact powers of two keeps dyadic products exact.
struct ScaledMatrix {
    Matrix m;
    long exp2 = 0;

    void renormalize() {
        double big = m.cwiseAbs().maxCoeff();
        if (big > 0 && std::isfinite(big)) {
            int e = std::ilogb(big);
            m = m.unaryExpr([e](double x) { return std::ldexp(x, -e); });
            exp2 += e;
        }
    }

    double log_scale() const { return double(exp2) * std::numbers::ln2; }
    Matrix value() const { return m.unaryExpr([this](double x) { return std::ldexp(x, int(exp2)); }); }
    double log_norm() const { return log_scale() + std::log(spectral_norm(m)); }
    double log_min_singular() const { return log_scale() + std::log(min_singular_value(m)); }
    double log_wedge() const { return 2.0 * log_scale() + wedge_log_norm(m); }
    double gap() const { return m.rows() > 1 ? singular(m).gap() : 0.0; }
};

constexpr std::size_t kRenormalizeEvery = 64;

class OneStepCocycle {
public:
    OneStepCocycle() = default;

    explicit OneStepCocycle(std::vector<Matrix> mats) : mats_(std::move(mats)) {
        if (mats_.empty()) throw Error(ErrorKind::InvalidArgument, "cocycle needs at least one generator");
        d_ = int(mats_[0].rows());
        for (std::size_t i = 0; i < mats_.size(); ++i) {
            const auto& a = mats_[i];
            if (a.rows() != d_ || a.cols() != d_)
                throw Error(ErrorKind::InvalidArgument, "generator " + std::to_string(i + 1) + " has wrong shape");
            if (!a.allFinite()) throw Error(ErrorKind::InvalidArgument, "generator " + std::to_string(i + 1) + " not finite");
            auto sd = singular(a);
            if (!(sd.values(d_ - 1) > 1e-12 * sd.values(0)))
                throw Error(ErrorKind::InvalidArgument, "generator " + std::to_string(i + 1) + " is not invertible");
        }
    }

    int d() const { return d_; }
    int q() const { return int(mats_.size()); }
    const Matrix& operator[](std::size_t i) const { return mats_[i]; }
    const std::vector<Matrix>& mats() const { return mats_; }

private:
    int d_ = 0;
    std::vector<Matrix> mats_;
};

// A_{i_{n-1}} ... A_{i_0}
inline ScaledMatrix scaled_product(const OneStepCocycle& c, const Word& w) {
    if (w.empty()) throw Error(ErrorKind::InvalidArgument, "product of empty word");
    ScaledMatrix out{c[w[0]], 0};
    for (std::size_t k = 1; k < w.size(); ++k) {
        out.m = c[w[k]] * out.m;
        if (k % kRenormalizeEvery == 0) out.renormalize();
    }
    return out;
}

// A_{i_0}^T ... A_{i_{n-1}}^T, accumulated directly from transposes.
inline ScaledMatrix scaled_adjoint_product(const OneStepCocycle& c, const Word& w) {
    if (w.empty()) throw Error(ErrorKind::InvalidArgument, "product of empty word");
    ScaledMatrix out{c[w[0]].transpose(), 0};
    for (std::size_t k = 1; k < w.size(); ++k) {
        out.m = out.m * c[w[k]].transpose();
        if (k % kRenormalizeEvery == 0) out.renormalize();
    }
    return out;
}

inline Matrix product(const OneStepCocycle& c, const Word& w) { return scaled_product(c, w).value(); }

inline Matrix adjoint_product(const OneStepCocycle& c, const Word& w) { return scaled_adjoint_product(c, w).value(); }

constexpr double kMaxCondition = 1e14;

// (A^[n])^{-1}
inline Matrix inv_adjoint_product(const OneStepCocycle& c, const Word& w) {
    auto p = scaled_adjoint_product(c, w);
    auto sd = singular(p.m);
    double cond = sd.values(0) / sd.values(sd.values.size() - 1);
    if (!(cond <= kMaxCondition)) throw Error(ErrorKind::IllConditioned, "condition number " + std::to_string(cond));
    return p.m.inverse().unaryExpr([&p](double x) { return std::ldexp(x, -int(p.exp2)); });
}

inline double log_norm(const OneStepCocycle& c, const Word& w) { return scaled_product(c, w).log_norm(); }

} // namespace thermo
