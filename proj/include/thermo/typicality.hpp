// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "thermo/cocycle.hpp"
#include "thermo/common.hpp"
#include "thermo/sft.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace thermo {

constexpr double kTolEig = 1e-8;
constexpr double kTolRank = 1e-8;

struct Condition1Result {
    bool ok = false;
    std::vector<double> moduli;  // descending
    double min_relative_gap = 0.0;
    Matrix eigvecs;              // unit real eigenvectors, columns in modulus order (when ok)
};

inline Condition1Result check_condition1(const Subshift& s, const OneStepCocycle& c, const Word& p) {
    if (!s.cyclically_admissible(p)) throw Error(ErrorKind::InvalidArgument, "periodic word is not cyclically admissible");
    Matrix P = product(c, p);
    Eigen::EigenSolver<Matrix> es(P);
    auto vals = es.eigenvalues();
    auto vecs = es.eigenvectors();
    const int d = c.d();
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(vals(a)) > std::abs(vals(b)); });
    Condition1Result r;
    for (int i : order) r.moduli.push_back(std::abs(vals(i)));
    r.min_relative_gap = d > 1 ? std::numeric_limits<double>::infinity() : 1.0;
    for (int i = 0; i + 1 < d; ++i)
        r.min_relative_gap = std::min(r.min_relative_gap, (r.moduli[i] - r.moduli[i + 1]) / r.moduli[i]);
    r.ok = r.min_relative_gap > kTolEig;
    if (r.ok) {
        r.eigvecs.resize(d, d);
        for (int k = 0; k < d; ++k) {
            Vector v = vecs.col(order[k]).real();
            r.eigvecs.col(k) = v / v.norm();
        }
    }
    return r;
}

struct TwistingResult {
    bool ok = false;
    double min_sv = std::numeric_limits<double>::infinity();
};

// Smallest singular value divided by the geometric mean of column norms.
inline double relative_min_sv(const Matrix& cols) {
    if (cols.cols() == 0) return std::numeric_limits<double>::infinity();
    double lg = 0.0;
    for (Eigen::Index i = 0; i < cols.cols(); ++i) lg += std::log(cols.col(i).norm());
    double geo = std::exp(lg / double(cols.cols()));
    Eigen::JacobiSVD<Matrix> svd(cols);
    return svd.singularValues()(svd.singularValues().size() - 1) / geo;
}

// A^l along the periodic sequence p p p ...
inline Matrix periodic_product(const OneStepCocycle& c, const Word& p, std::size_t l) {
    Word w;
    for (std::size_t i = 0; i < l; ++i) w.push_back(p[i % p.size()]);
    return product(c, w);
}

inline TwistingResult check_twisting(const Subshift& s, const OneStepCocycle& c, const Word& p, const Word& z,
                                     const Matrix& eigvecs) {
    if (p.empty() || z.empty()) throw Error(ErrorKind::InvalidArgument, "empty word in twisting check");
    if (!s.admissible(z) || !s.allowed(p.back(), z.front()) || !s.allowed(z.back(), p.front()))
        throw Error(ErrorKind::InvalidArgument, "connecting word junctions are not admissible");
    const int d = c.d();
    const std::size_t l = z.size();
    Matrix X = periodic_product(c, p, l).inverse() * product(c, z);
    Matrix moved = X * eigvecs;
    TwistingResult r;
    // Subsets of {0..d-1} as bitmasks; every pair with |I| + |J| <= d.
    for (unsigned I = 0; I < (1u << d); ++I)
        for (unsigned J = 0; J < (1u << d); ++J) {
            int k = std::popcount(I) + std::popcount(J);
            if (k == 0 || k > d) continue;
            Matrix cols(d, k);
            int col = 0;
            for (int i = 0; i < d; ++i)
                if (I & (1u << i)) cols.col(col++) = moved.col(i);
            for (int j = 0; j < d; ++j)
                if (J & (1u << j)) cols.col(col++) = eigvecs.col(j);
            r.min_sv = std::min(r.min_sv, relative_min_sv(cols));
        }
    r.ok = r.min_sv > kTolRank;
    return r;
}

struct TypicalityCertificate {
    Word p;
    Word z;
    std::vector<double> eigen_moduli;
    double min_relative_gap = 0.0;
    double min_independence_sv = 0.0;
    double tol_eig = kTolEig;
    double tol_rank = kTolRank;
};

struct CandidateNote {
    Word p;
    std::string failed;  // "condition1" or "twisting"
    double margin;       // modulus gap or best twisting sv
};

struct TypicalityResult {
    bool certified = false;
    std::optional<TypicalityCertificate> certificate;
    std::size_t max_period = 0;
    std::size_t max_connect = 0;
    std::size_t periodic_tested = 0;
    double max_modulus_gap = 0.0;  // best condition-1 gap seen
    std::vector<CandidateNote> best_candidates;
    std::string reason;
};

// Lexicographically least rotation representative test.
inline bool is_rotation_minimal(const Word& w) {
    for (std::size_t r = 1; r < w.size(); ++r) {
        Word rot(w.begin() + std::ptrdiff_t(r), w.end());
        rot.insert(rot.end(), w.begin(), w.begin() + std::ptrdiff_t(r));
        if (rot < w) return false;
    }
    return true;
}

inline std::vector<Word> periodic_words(const Subshift& s, std::size_t n) {
    std::vector<Word> out;
    for_each_word(s, n, [&](const Word& w) {
        if (s.allowed(w.back(), w.front()) && is_rotation_minimal(w)) out.push_back(w);
    });
    return out;
}

inline TypicalityResult certify(const Subshift& s, const OneStepCocycle& c, std::size_t max_period = 8,
                                std::size_t max_connect = 8) {
    if (max_period < 1 || max_connect < 1) throw Error(ErrorKind::InvalidArgument, "search bounds must be >= 1");
    TypicalityResult res;
    res.max_period = max_period;
    res.max_connect = max_connect;
    std::size_t cond1_failures = 0;
    for (std::size_t n = 1; n <= max_period; ++n) {
        for (const Word& p : periodic_words(s, n)) {
            ++res.periodic_tested;
            auto c1 = check_condition1(s, c, p);
            res.max_modulus_gap = std::max(res.max_modulus_gap, std::isfinite(c1.min_relative_gap) ? c1.min_relative_gap : 0.0);
            if (!c1.ok) {
                ++cond1_failures;
                if (res.best_candidates.size() < 16) res.best_candidates.push_back({p, "condition1", c1.min_relative_gap});
                continue;
            }
            double best_sv = 0.0;
            for (std::size_t l = 1; l <= max_connect; ++l) {
                std::optional<TypicalityCertificate> found;
                for_each_word(s, l, [&](const Word& z) {
                    if (found) return;
                    if (!s.allowed(p.back(), z.front()) || !s.allowed(z.back(), p.front())) return;
                    auto tw = check_twisting(s, c, p, z, c1.eigvecs);
                    best_sv = std::max(best_sv, tw.min_sv);
                    if (tw.ok) {
                        TypicalityCertificate cert;
                        cert.p = p;
                        cert.z = z;
                        cert.eigen_moduli = c1.moduli;
                        cert.min_relative_gap = c1.min_relative_gap;
                        cert.min_independence_sv = tw.min_sv;
                        found = cert;
                    }
                });
                if (found) {
                    res.certified = true;
                    res.certificate = found;
                    res.reason = "certificate found";
                    return res;
                }
            }
            if (res.best_candidates.size() < 16) res.best_candidates.push_back({p, "twisting", best_sv});
        }
    }
    if (cond1_failures == res.periodic_tested)
        res.reason = "SearchExhausted: every periodic word up to the period bound fails condition 1 "
                     "(eigenvalue moduli coincide); inconclusive, not a refutation";
    else
        res.reason = "SearchExhausted: no connecting word up to the bound passes the twisting condition; "
                     "inconclusive, not a refutation";
    return res;
}

} // namespace thermo
