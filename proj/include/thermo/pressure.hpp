// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "thermo/cocycle.hpp"
#include "thermo/common.hpp"
#include "thermo/parallel.hpp"
#include "thermo/potential.hpp"
#include "thermo/sft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace thermo {

constexpr std::uint64_t kEnumerationCap = 20000000;

inline void check_enumeration_cap(const Subshift& s, std::size_t n) {
    auto c = count_words(s, n);
    if (c > kEnumerationCap)
        throw Error(ErrorKind::EnumerationCap, std::to_string(c) + " words at depth " + std::to_string(n));
}

// Streaming log-sum-exp; the result depends only on the order of add() calls.
struct LogSumExp {
    double max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;

    void add(double x) {
        if (x == -std::numeric_limits<double>::infinity()) return;
        if (x > max) {
            sum = sum * std::exp(max - x) + 1.0;
            max = x;
        } else {
            sum += std::exp(x - max);
        }
    }

    void merge(const LogSumExp& o) {
        if (o.sum == 0.0) return;
        if (o.max > max) {
            sum = sum * std::exp(max - o.max) + o.sum;
            max = o.max;
        } else {
            sum += o.sum * std::exp(o.max - max);
        }
    }

    double value() const { return sum == 0.0 ? -std::numeric_limits<double>::infinity() : max + std::log(sum); }
};

// log s_m for m = 1..n, s_m = sum over C_m of exp(phi_t).
inline std::vector<double> log_partition_levels(const Subshift& s, const OneStepCocycle& c, const Potential& psi,
                                                double t, std::size_t n) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "depth must be >= 1");
    if (psi.depth != 1) throw Error(ErrorKind::InvalidArgument, "pressure needs a depth-1 potential");
    check_enumeration_cap(s, n);
    struct Node {
        ScaledMatrix prod;
        double birkhoff;
    };
    const int q = s.q();
    std::vector<std::vector<LogSumExp>> parts(q, std::vector<LogSumExp>(n));
    parallel_for(std::size_t(q), [&](std::size_t a) {
        auto& acc = parts[a];
        Word w{Symbol(a)};
        Node root{ScaledMatrix{c[a], 0}, psi(int(a))};
        auto value = [&](const Node& x) { return t == 0.0 ? x.birkhoff : x.birkhoff + t * x.prod.log_norm(); };
        acc[0].add(value(root));
        auto extend = [&](const Node& x, const Word& word) {
            Node y{ScaledMatrix{c[word.back()] * x.prod.m, x.prod.exp2}, x.birkhoff + psi(word.back())};
            if (word.size() % kRenormalizeEvery == 0) y.prod.renormalize();
            return y;
        };
        auto visit = [&](const Word& word, const Node& x) { acc[word.size() - 1].add(value(x)); };
        grow_words(s, n, w, root, extend, visit);
    });
    std::vector<double> out(n);
    for (std::size_t m = 0; m < n; ++m) {
        LogSumExp total;
        for (int a = 0; a < q; ++a) total.merge(parts[a][m]);
        out[m] = total.value();
    }
    return out;
}

struct PressureEstimate {
    double t = 0.0;
    std::size_t n = 0;
    double p_n = 0.0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
};

// Exact pressure of the additive potential psi(a) + f(a).
inline double additive_pressure(const Subshift& s, const Potential& psi, const std::vector<double>& f) {
    std::vector<double> v(psi.values);
    for (std::size_t a = 0; a < v.size(); ++a) v[a] += f[a];
    return rpf_solve(s, Potential::per_symbol(v)).log_lambda;
}

struct AdditiveBounds {
    double by_norm;     // P(psi + t log||A||)
    double by_min_sv;   // P(psi + t log sigma_d(A))
    double by_det;      // P(psi + (t/d) log|det A|)
};

inline AdditiveBounds additive_bounds(const Subshift& s, const OneStepCocycle& c, const Potential& psi, double t) {
    const int q = s.q();
    std::vector<double> fn(q), fs(q), fd(q);
    for (int a = 0; a < q; ++a) {
        auto sd = singular(c[a]);
        fn[a] = t * std::log(sd.values(0));
        fs[a] = t * std::log(sd.values(c.d() - 1));
        double logdet = 0.0;
        for (int i = 0; i < c.d(); ++i) logdet += std::log(sd.values(i));
        fd[a] = t * logdet / c.d();
    }
    return {additive_pressure(s, psi, fn), additive_pressure(s, psi, fs), additive_pressure(s, psi, fd)};
}

// max over C_k of |phi_{t,k}|; zero for k = 0.
inline double phi_sup_norm(const Subshift& s, const OneStepCocycle& c, const Potential& psi, double t, std::size_t k) {
    if (k == 0) return 0.0;
    double m = 0.0;
    for_each_word(s, k, [&](const Word& w) { m = std::max(m, std::abs(phi_t(s, c, psi, w, t))); });
    return m;
}

// Brackets from precomputed levels log s_1..log s_n.
inline std::pair<double, double> brackets_from_levels(const Subshift& s, const OneStepCocycle& c, const Potential& psi,
                                                      double t, const std::vector<double>& log_s) {
    const std::size_t n = log_s.size();
    auto add = additive_bounds(s, c, psi, t);
    double lower, upper;
    if (t < 0) {
        const std::size_t k = std::size_t(s.mixing_gap());
        const double sup_k = phi_sup_norm(s, c, psi, t, k);
        lower = add.by_norm;
        for (std::size_t m = k + 1; m <= n + k; ++m)
            lower = std::max(lower, (-sup_k + log_s[m - k - 1]) / double(m));
        upper = std::min(add.by_min_sv, add.by_det);
    } else {
        lower = std::max(add.by_min_sv, add.by_det);
        upper = add.by_norm;
        for (std::size_t m = 1; m <= n; ++m) upper = std::min(upper, log_s[m - 1] / double(m));
    }
    return {lower, upper};
}

inline std::pair<double, double> bracket_bounds(const Subshift& s, const OneStepCocycle& c, const Potential& psi,
                                                double t, std::size_t n) {
    return brackets_from_levels(s, c, psi, t, log_partition_levels(s, c, psi, t, n));
}

inline PressureEstimate truncated_pressure(const Subshift& s, const OneStepCocycle& c, const Potential& psi, double t,
                                           std::size_t n) {
    auto levels = log_partition_levels(s, c, psi, t, n);
    PressureEstimate e;
    e.t = t;
    e.n = n;
    e.p_n = levels.back() / double(n);
    std::tie(e.lower, e.upper) = brackets_from_levels(s, c, psi, t, levels);
    return e;
}

// Raises the lower bracket with a variational witness value.
inline PressureEstimate with_witness(PressureEstimate e, double witness) {
    e.lower = std::max(e.lower, witness);
    return e;
}

struct PressureCurve {
    std::vector<double> grid;
    std::vector<PressureEstimate> estimates;
    std::vector<double> slopes;

    std::vector<double> values() const {
        std::vector<double> v;
        for (const auto& e : estimates) v.push_back(e.p_n);
        return v;
    }
};

inline std::vector<double> finite_difference_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t k = x.size();
    std::vector<double> out(k, std::numeric_limits<double>::quiet_NaN());
    if (k < 2) return out;
    out[0] = (y[1] - y[0]) / (x[1] - x[0]);
    out[k - 1] = (y[k - 1] - y[k - 2]) / (x[k - 1] - x[k - 2]);
    for (std::size_t i = 1; i + 1 < k; ++i) out[i] = (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]);
    return out;
}

inline void check_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "t grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw Error(ErrorKind::InvalidArgument, "t grid must be strictly increasing");
}

inline PressureCurve pressure_curve(const Subshift& s, const OneStepCocycle& c, const Potential& psi,
                                    const std::vector<double>& t_grid, std::size_t n) {
    check_grid(t_grid);
    PressureCurve curve;
    curve.grid = t_grid;
    for (double t : t_grid) curve.estimates.push_back(truncated_pressure(s, c, psi, t, n));
    curve.slopes = finite_difference_slopes(curve.grid, curve.values());
    return curve;
}

enum class CurveShape { Linear, StrictlyConvexWindow, NonConvex, Indeterminate };

inline const char* to_string(CurveShape k) {
    switch (k) {
    case CurveShape::Linear: return "linear";
    case CurveShape::StrictlyConvexWindow: return "strictly convex window";
    case CurveShape::NonConvex: return "non-convex";
    case CurveShape::Indeterminate: return "indeterminate";
    }
    return "unknown";
}

struct ConvexityReport {
    double tol = 1e-6;
    std::vector<double> second_differences;  // one per interior grid point
    CurveShape shape = CurveShape::Indeterminate;
    std::vector<std::size_t> violations;     // interior indices with second difference < -tol
    double window_lo = 0.0, window_hi = 0.0; // longest run with second difference > tol
    std::optional<double> kink_t;            // grid point with the largest second difference
};

// Second differences are scaled to the local mean spacing so they coincide with
// p(t+h) - 2p(t) + p(t-h) on uniform grids.
inline ConvexityReport convexity_report(const std::vector<double>& grid, const std::vector<double>& values,
                                        double tol = 1e-6) {
    if (grid.size() < 3) throw Error(ErrorKind::InsufficientGrid, "need at least 3 grid points");
    ConvexityReport r;
    r.tol = tol;
    bool all_flat = true;
    std::size_t run = 0, best = 0, best_end = 0;
    double biggest = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        double h1 = grid[i] - grid[i - 1];
        double h2 = grid[i + 1] - grid[i];
        double dd = 2.0 * ((values[i + 1] - values[i]) / h2 - (values[i] - values[i - 1]) / h1) / (h1 + h2);
        double hm = 0.5 * (h1 + h2);
        double sd = dd * hm * hm;
        r.second_differences.push_back(sd);
        if (std::abs(sd) >= tol) all_flat = false;
        if (sd < -tol) r.violations.push_back(i);
        if (sd > tol) {
            ++run;
            if (run > best) {
                best = run;
                best_end = i;
            }
        } else {
            run = 0;
        }
        if (sd > biggest) {
            biggest = sd;
            r.kink_t = grid[i];
        }
    }
    if (!r.violations.empty())
        r.shape = CurveShape::NonConvex;
    else if (all_flat)
        r.shape = CurveShape::Linear;
    else if (best > 0)
        r.shape = CurveShape::StrictlyConvexWindow;
    if (best > 0) {
        r.window_lo = grid[best_end + 1 - best];
        r.window_hi = grid[best_end];
    }
    if (r.shape == CurveShape::Linear) r.kink_t.reset();
    return r;
}

inline ConvexityReport convexity_report(const PressureCurve& curve, double tol = 1e-6) {
    return convexity_report(curve.grid, curve.values(), tol);
}

struct LegendreEntry {
    double alpha;
    double value;     // min over grid of p(t) - t alpha
    double t_star;    // minimizing grid point
    bool attained;    // false when the minimum only occurs at a grid endpoint
};

inline std::vector<LegendreEntry> legendre_spectrum(const std::vector<double>& grid, const std::vector<double>& values,
                                                    const std::vector<double>& alpha_grid, double tol = 1e-6) {
    if (grid.size() >= 3) {
        auto rep = convexity_report(grid, values, tol);
        if (rep.shape == CurveShape::NonConvex) throw Error(ErrorKind::NonConvexInput, "curve fails convexity check");
    }
    std::vector<LegendreEntry> out;
    for (double alpha : alpha_grid) {
        std::vector<double> v(grid.size());
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            v[i] = values[i] - grid[i] * alpha;
            best = std::min(best, v[i]);
        }
        double slack = 1e-12 * std::max(1.0, std::abs(best));
        LegendreEntry e{alpha, best, grid[0], false};
        bool first = true;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (v[i] > best + slack) continue;
            if (first) {
                e.t_star = grid[i];
                first = false;
            }
            if (i > 0 && i + 1 < grid.size()) {
                e.attained = true;
                e.t_star = grid[i];
                break;
            }
        }
        out.push_back(e);
    }
    return out;
}

inline std::vector<LegendreEntry> legendre_spectrum(const PressureCurve& curve, const std::vector<double>& alpha_grid,
                                                    double tol = 1e-6) {
    return legendre_spectrum(curve.grid, curve.values(), alpha_grid, tol);
}

} // namespace thermo
