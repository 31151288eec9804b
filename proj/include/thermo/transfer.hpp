// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "thermo/cocycle.hpp"
#include "thermo/common.hpp"
#include "thermo/parallel.hpp"
#include "thermo/potential.hpp"
#include "thermo/pressure.hpp"
#include "thermo/projective.hpp"
#include "thermo/sft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace thermo {

// Functions on {0..q-1} x P^1, sampled at theta_m = m pi / M.
struct OperatorGrid {
    int q = 0;
    int M = 0;
    std::vector<double> values;  // index j * M + m

    OperatorGrid() = default;
    OperatorGrid(int q_, int M_, double fill = 0.0) : q(q_), M(M_), values(std::size_t(q_) * M_, fill) {
        if (M_ < 2) throw Error(ErrorKind::InvalidArgument, "grid needs M >= 2");
    }

    double& operator()(int j, int m) { return values[std::size_t(j) * M + m]; }
    double operator()(int j, int m) const { return values[std::size_t(j) * M + m]; }

    double step() const { return std::numbers::pi / M; }
    double node(int m) const { return m * step(); }

    // Linear interpolation, periodic mod pi.
    double at(int j, double theta) const {
        double x = theta / step();
        double fl = std::floor(x);
        double a = x - fl;
        long k = long(fl) % M;
        if (k < 0) k += M;
        long k1 = k + 1 == M ? 0 : k + 1;
        const double* row = values.data() + std::size_t(j) * M;
        return (1.0 - a) * row[k] + a * row[k1];
    }
};

inline double angle_of(double x, double y) {
    double th = std::atan2(y, x);
    if (th < 0) th += std::numbers::pi;
    if (th >= std::numbers::pi) th -= std::numbers::pi;
    return th;
}

// Precomputed sparse structure of the discretized operator.
class TransferOperator {
public:
    TransferOperator(const Subshift& s, const OneStepCocycle& c, const GFunction& g, double t, int M)
        : q_(s.q()), M_(M), t_(t), g_(g.weights), shift_(s) {
        if (c.d() != 2) throw Error(ErrorKind::DimensionUnsupported, "projective grid supports d = 2 only");
        if (c.q() != s.q() || g.q() != s.q()) throw Error(ErrorKind::InvalidArgument, "alphabet sizes differ");
        if (M < 2) throw Error(ErrorKind::InvalidArgument, "grid needs M >= 2");
        const double step = std::numbers::pi / M;
        const std::size_t cells = std::size_t(q_) * M_;
        weight_.resize(cells);
        lo_.resize(cells);
        frac_.resize(cells);
        for (int a = 0; a < q_; ++a) {
            const Matrix& A = c[a];
            for (int m = 0; m < M_; ++m) {
                double th = m * step;
                double ux = std::cos(th), uy = std::sin(th);
                // A^T u
                double wx = A(0, 0) * ux + A(1, 0) * uy;
                double wy = A(0, 1) * ux + A(1, 1) * uy;
                double nrm = std::hypot(wx, wy);
                double x = angle_of(wx, wy) / step;
                double fl = std::floor(x);
                int k = int(fl) % M_;
                std::size_t i = std::size_t(a) * M_ + m;
                weight_[i] = t == 0.0 ? 1.0 : std::pow(nrm, t);
                lo_[i] = k;
                frac_[i] = x - fl;
            }
        }
    }

    int q() const { return q_; }
    int M() const { return M_; }
    double t() const { return t_; }

    OperatorGrid apply(const OperatorGrid& f) const {
        check(f);
        std::vector<double> pulled(f.values.size());
        for (int a = 0; a < q_; ++a) {
            const double* fa = f.values.data() + std::size_t(a) * M_;
            for (int m = 0; m < M_; ++m) {
                std::size_t i = std::size_t(a) * M_ + m;
                int k = lo_[i];
                int k1 = k + 1 == M_ ? 0 : k + 1;
                pulled[i] = weight_[i] * ((1.0 - frac_[i]) * fa[k] + frac_[i] * fa[k1]);
            }
        }
        OperatorGrid out(q_, M_, 0.0);
        for (int j = 0; j < q_; ++j) {
            double* oj = out.values.data() + std::size_t(j) * M_;
            for (int a = 0; a < q_; ++a) {
                if (!shift_.allowed(a, j)) continue;
                double gw = g_(a, j);
                const double* pa = pulled.data() + std::size_t(a) * M_;
                for (int m = 0; m < M_; ++m) oj[m] += gw * pa[m];
            }
        }
        return out;
    }

    // nu -> nu K (row vector times the operator matrix).
    OperatorGrid apply_adjoint(const OperatorGrid& nu) const {
        check(nu);
        OperatorGrid out(q_, M_, 0.0);
        std::vector<double> w(M_);
        for (int a = 0; a < q_; ++a) {
            std::fill(w.begin(), w.end(), 0.0);
            for (int j = 0; j < q_; ++j) {
                if (!shift_.allowed(a, j)) continue;
                double gw = g_(a, j);
                const double* nj = nu.values.data() + std::size_t(j) * M_;
                for (int m = 0; m < M_; ++m) w[m] += gw * nj[m];
            }
            double* oa = out.values.data() + std::size_t(a) * M_;
            for (int m = 0; m < M_; ++m) {
                std::size_t i = std::size_t(a) * M_ + m;
                int k = lo_[i];
                int k1 = k + 1 == M_ ? 0 : k + 1;
                double v = w[m] * weight_[i];
                oa[k] += (1.0 - frac_[i]) * v;
                oa[k1] += frac_[i] * v;
            }
        }
        return out;
    }

private:
    void check(const OperatorGrid& f) const {
        if (f.q != q_ || f.M != M_) throw Error(ErrorKind::InvalidArgument, "grid size mismatch");
    }

    int q_, M_;
    double t_;
    Matrix g_;
    Subshift shift_;
    std::vector<double> weight_;
    std::vector<int> lo_;
    std::vector<double> frac_;
};

inline OperatorGrid apply_operator(const Subshift& s, const OneStepCocycle& c, const GFunction& g, double t,
                                   const OperatorGrid& f) {
    return TransferOperator(s, c, g, t, f.M).apply(f);
}

struct SpectralData {
    double t = 0.0;
    int M = 0;
    double rho = 0.0;
    OperatorGrid h;         // integral against nu_tilde is 1
    OperatorGrid nu_tilde;  // atoms sum to 1
    double gap_est = 0.0;
    std::size_t iterations = 0;
    std::size_t adjoint_iterations = 0;
    double residual = 0.0;          // ||K h - rho h|| / (rho ||h||), sup norm
    double adjoint_residual = 0.0;  // ||nu K / rho - nu||_1

    double log_rho() const { return std::log(rho); }
};

struct EigenOptions {
    double rho_tol = 1e-10;
    double residual_tol = 1e-9;
    std::size_t max_iterations = 100000;
};

inline SpectralData leading_eigen(const Subshift& s, const OneStepCocycle& c, const GFunction& g, double t, int M,
                                  const EigenOptions& opt = {}) {
    if (M < 64) throw Error(ErrorKind::InvalidArgument, "leading_eigen needs M >= 64");
    TransferOperator op(s, c, g, t, M);
    SpectralData sd;
    sd.t = t;
    sd.M = M;
    OperatorGrid f(s.q(), M, 1.0);
    double rho_prev = 0.0;
    double inc_prev = 0.0;
    std::vector<double> ratios;
    bool done = false;
    std::size_t it = 0;
    for (it = 1; it <= opt.max_iterations; ++it) {
        OperatorGrid y = op.apply(f);
        double rho = *std::max_element(y.values.begin(), y.values.end());
        if (!(rho > 0) || !std::isfinite(rho)) throw Error(ErrorKind::NoConvergence, "operator lost positivity");
        double res = 0.0, inc = 0.0;
        for (std::size_t i = 0; i < y.values.size(); ++i) {
            res = std::max(res, std::abs(y.values[i] - rho * f.values[i]));
            y.values[i] /= rho;
            inc = std::max(inc, std::abs(y.values[i] - f.values[i]));
        }
        res /= rho;
        if (inc_prev > 0 && inc > 0) ratios.push_back(inc / inc_prev);
        inc_prev = inc;
        f = std::move(y);
        sd.residual = res;
        if (std::abs(rho - rho_prev) < opt.rho_tol * rho && res <= opt.residual_tol) {
            sd.rho = rho;
            done = true;
            break;
        }
        rho_prev = rho;
    }
    if (!done)
        throw Error(ErrorKind::NoConvergence, "power iteration: " + std::to_string(opt.max_iterations) +
                                                  " iterations, last residual " + std::to_string(sd.residual));
    sd.iterations = it;
    if (!ratios.empty()) {
        std::size_t take = std::min<std::size_t>(10, ratios.size());
        double lg = 0.0;
        for (std::size_t i = ratios.size() - take; i < ratios.size(); ++i) lg += std::log(ratios[i]);
        sd.gap_est = std::min(1.0, std::exp(lg / double(take)));
    }
    // Residual of the returned vector.
    {
        OperatorGrid y = op.apply(f);
        double r = 0.0, fmax = 0.0;
        for (std::size_t i = 0; i < y.values.size(); ++i) {
            r = std::max(r, std::abs(y.values[i] - sd.rho * f.values[i]));
            fmax = std::max(fmax, std::abs(f.values[i]));
        }
        sd.residual = r / (sd.rho * fmax);
    }

    OperatorGrid nu(s.q(), M, 1.0 / (double(s.q()) * M));
    done = false;
    for (it = 1; it <= opt.max_iterations; ++it) {
        OperatorGrid z = op.apply_adjoint(nu);
        double total = 0.0;
        for (double v : z.values) total += v;
        double res = 0.0;
        for (std::size_t i = 0; i < z.values.size(); ++i) {
            res += std::abs(z.values[i] / sd.rho - nu.values[i]);
            z.values[i] /= total;
        }
        nu = std::move(z);
        sd.adjoint_residual = res;
        if (res <= opt.residual_tol) {
            done = true;
            break;
        }
    }
    if (!done)
        throw Error(ErrorKind::NoConvergence, "adjoint iteration: " + std::to_string(opt.max_iterations) +
                                                  " iterations, last residual " + std::to_string(sd.adjoint_residual));
    sd.adjoint_iterations = it;
    double pair = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) pair += nu.values[i] * f.values[i];
    for (double& v : f.values) v /= pair;
    sd.h = std::move(f);
    sd.nu_tilde = std::move(nu);
    return sd;
}

namespace detail {

struct AdjointNode {
    Eigen::Matrix2d p;  // A^[n](I) up to exp(log_scale)
    double log_scale;
    double g_inner;     // prod of g over the n-1 inner transitions
};

// Visits every length-n word with A^[n], in lexicographic order; chunks run in
// parallel and results are concatenated in prefix order.
template<typename R, typename F>
std::vector<R> scan_adjoint_products(const Subshift& s, const OneStepCocycle& c, const GFunction& g, std::size_t n,
                                     F&& per_word, std::vector<Word>* words_out = nullptr) {
    check_enumeration_cap(s, n);
    auto prefixes = chunk_prefixes(s, n);
    std::vector<std::vector<R>> parts(prefixes.size());
    std::vector<std::vector<Word>> wparts(prefixes.size());
    auto mat2 = [&](int a) {
        Eigen::Matrix2d m;
        m << c[a](0, 0), c[a](0, 1), c[a](1, 0), c[a](1, 1);
        return m;
    };
    std::vector<Eigen::Matrix2d> tr(c.q());
    for (int a = 0; a < c.q(); ++a) tr[a] = mat2(a).transpose();
    parallel_for(prefixes.size(), [&](std::size_t ci) {
        const Word& pre = prefixes[ci];
        AdjointNode root{tr[pre[0]], 0.0, 1.0};
        for (std::size_t k = 1; k < pre.size(); ++k) {
            root.p = root.p * tr[pre[k]];
            root.g_inner *= g(pre[k - 1], pre[k]);
            if ((k + 1) % kRenormalizeEvery == 0) {
                double big = root.p.cwiseAbs().maxCoeff();
                root.p /= big;
                root.log_scale += std::log(big);
            }
        }
        auto emit = [&](const Word& w, const AdjointNode& x) {
            parts[ci].push_back(per_word(w, x));
            if (words_out) wparts[ci].push_back(w);
        };
        if (pre.size() == n) {
            emit(pre, root);
            return;
        }
        Word w = pre;
        auto extend = [&](const AdjointNode& x, const Word& word) {
            AdjointNode y{x.p * tr[word.back()], x.log_scale, x.g_inner * g(word[word.size() - 2], word.back())};
            if (word.size() % kRenormalizeEvery == 0) {
                double big = y.p.cwiseAbs().maxCoeff();
                y.p /= big;
                y.log_scale += std::log(big);
            }
            return y;
        };
        auto visit = [&](const Word& word, const AdjointNode& x) {
            if (word.size() == n) emit(word, x);
        };
        grow_words(s, n, w, root, extend, visit);
    });
    std::vector<R> out;
    for (auto& p : parts)
        for (auto& r : p) out.push_back(std::move(r));
    if (words_out) {
        words_out->clear();
        for (auto& p : wparts)
            for (auto& w : p) words_out->push_back(std::move(w));
    }
    return out;
}

// w_b(m) = sum_j T[b][j] g(b -> j) nu(j, m): the nu-weight seen by a word ending in b.
inline std::vector<std::vector<double>> terminal_weights(const SpectralData& sd, const Subshift& s, const GFunction& g) {
    std::vector<std::vector<double>> w(s.q(), std::vector<double>(sd.M, 0.0));
    for (int b = 0; b < s.q(); ++b)
        for (int j = 0; j < s.q(); ++j)
            if (s.allowed(b, j))
                for (int m = 0; m < sd.M; ++m) w[b][m] += g(b, j) * sd.nu_tilde(j, m);
    return w;
}

struct AtomSums {
    double mass = 0.0;   // sum_m w ||P u||^t h
    double dlog = 0.0;   // sum_m w ||P u||^t log||P u|| h
};

inline AtomSums atom_sums(const SpectralData& sd, const std::vector<double>& w, int first, const AdjointNode& x,
                          std::size_t n, bool with_log, const std::vector<double>& cs, const std::vector<double>& sn) {
    const double t = sd.t;
    const double ls = x.log_scale;
    const double a = x.p(0, 0), b = x.p(0, 1), cc = x.p(1, 0), d = x.p(1, 1);
    const double step = std::numbers::pi / sd.M;
    const double* hrow = sd.h.values.data() + std::size_t(first) * sd.M;
    AtomSums out;
    for (int m = 0; m < sd.M; ++m) {
        double vx = a * cs[m] + b * sn[m];
        double vy = cc * cs[m] + d * sn[m];
        double n2 = vx * vx + vy * vy;
        double lognorm = 0.5 * std::log(n2) + ls;
        double wt = t == 0.0 ? 1.0 : std::exp(t * lognorm);
        double xpos = angle_of(vx, vy) / step;
        double fl = std::floor(xpos);
        double fr = xpos - fl;
        int k = int(fl) % sd.M;
        int k1 = k + 1 == sd.M ? 0 : k + 1;
        double hv = (1.0 - fr) * hrow[k] + fr * hrow[k1];
        double term = w[m] * wt * hv;
        out.mass += term;
        if (with_log) out.dlog += term * lognorm / double(n);
    }
    return out;
}

inline std::pair<std::vector<double>, std::vector<double>> node_trig(int M) {
    std::vector<double> cs(M), sn(M);
    for (int m = 0; m < M; ++m) {
        double th = m * std::numbers::pi / M;
        cs[m] = std::cos(th);
        sn[m] = std::sin(th);
    }
    return {cs, sn};
}

} // namespace detail

// Cylinder masses from the atom-sum formula; `defect` records |raw total - 1|.
struct TMeasure {
    CylinderMeasure measure;
    double raw_total = 0.0;
    double defect = 0.0;
};

inline TMeasure mu_t_cylinders(const SpectralData& sd, const Subshift& s, const OneStepCocycle& c, const GFunction& g,
                               std::size_t n) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "depth must be >= 1");
    auto w = detail::terminal_weights(sd, s, g);
    auto [cs, sn] = detail::node_trig(sd.M);
    const double log_rho = sd.log_rho();
    TMeasure out;
    out.measure.n = n;
    out.measure.masses = detail::scan_adjoint_products<double>(
        s, c, g, n,
        [&](const Word& word, const detail::AdjointNode& x) {
            auto sums = detail::atom_sums(sd, w[word.back()], word[0], x, n, false, cs, sn);
            return std::exp(-double(n) * log_rho) * x.g_inner * sums.mass;
        },
        &out.measure.words);
    double total = 0.0;
    for (double m : out.measure.masses) total += m;
    out.raw_total = total;
    out.defect = std::abs(total - 1.0);
    for (double& m : out.measure.masses) m /= total;
    return out;
}

struct GibbsRatioRow {
    std::size_t n;
    double min_ratio;
    double max_ratio;
    double growth_factor;  // max_ratio(n) / max_ratio(n-1)
    double band_growth;    // (max/min)(n) / (max/min)(n-1)
    double defect;
};

// Ratio mu_t([I]) / exp(-n log rho_t + log g^(n)(I) + t log||A^n(I)||), with
// log g^(n)(I) = S_n psi(I) - n P(psi).
inline std::vector<GibbsRatioRow> gibbs_ratio_report(const SpectralData& sd, const Subshift& s, const OneStepCocycle& c,
                                                     const GFunction& g, std::size_t n_max) {
    std::vector<GibbsRatioRow> rows;
    const double t = sd.t;
    for (std::size_t n = 1; n <= n_max; ++n) {
        auto mu = mu_t_cylinders(sd, s, c, g, n);
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (std::size_t i = 0; i < mu.measure.words.size(); ++i) {
            const Word& w = mu.measure.words[i];
            double birk = 0.0;
            for (auto a : w) birk += g.psi(a);
            double log_den = -double(n) * (sd.log_rho() + g.log_lambda) + birk;
            if (t != 0.0) log_den += t * log_norm(c, w);
            double r = mu.measure.masses[i] * std::exp(-log_den);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        GibbsRatioRow row{n, lo, hi, std::numeric_limits<double>::quiet_NaN(),
                          std::numeric_limits<double>::quiet_NaN(), mu.defect};
        if (!rows.empty()) {
            row.growth_factor = hi / rows.back().max_ratio;
            row.band_growth = (hi / lo) / (rows.back().max_ratio / rows.back().min_ratio);
        }
        rows.push_back(row);
    }
    return rows;
}

struct AngleMeasure {
    int M = 0;
    std::vector<double> weights;  // mass at theta_m = m pi / M
};

// eta = angle projection of h * nu_tilde.
inline AngleMeasure project_eta(const SpectralData& sd) {
    AngleMeasure eta{sd.M, std::vector<double>(sd.M, 0.0)};
    for (int j = 0; j < sd.h.q; ++j)
        for (int m = 0; m < sd.M; ++m) eta.weights[m] += sd.h(j, m) * sd.nu_tilde(j, m);
    return eta;
}

struct DimensionReport {
    std::vector<double> s_grid;
    std::vector<int> levels;                     // M per level
    std::vector<std::vector<double>> sup_moment; // [level][s]
    std::vector<std::vector<double>> growth;     // [level pair][s]
    double estimate = 0.0;
    std::string label = "heuristic floored-moment estimate";
};

// A level pair passes at s when the sup-over-v moment grows by less than
// 2^(s/2) as M doubles; the estimate is the largest s such that every s' <= s
// in the grid passes at every pair.
inline DimensionReport dimension_estimate(const std::vector<AngleMeasure>& levels, const std::vector<double>& s_grid,
                                          const std::vector<double>& v_grid) {
    if (levels.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least two refinement levels");
    DimensionReport r;
    r.s_grid = s_grid;
    for (const auto& lv : levels) {
        r.levels.push_back(lv.M);
        double floor_ = std::numbers::pi / lv.M;
        std::vector<double> row;
        std::vector<int> atoms;
        for (int m = 0; m < lv.M; ++m)
            if (lv.weights[m] != 0.0) atoms.push_back(m);
        for (double s : s_grid) {
            double best = 0.0;
            for (double v : v_grid) {
                double mom = 0.0;
                for (int m : atoms) {
                    double delta = std::abs(std::cos(m * std::numbers::pi / lv.M - v));
                    mom += lv.weights[m] * std::pow(std::max(delta, floor_), -s);
                }
                best = std::max(best, mom);
            }
            // Hyperplanes orthogonal to every node as well, so an atom never
            // escapes the sup by sitting between caller directions.
            std::vector<double> kernel(lv.M);
            for (int k = 0; k < lv.M; ++k)
                kernel[k] = std::pow(std::max(std::abs(std::sin(k * std::numbers::pi / lv.M)), floor_), -s);
            for (int mv = 0; mv < lv.M; ++mv) {
                double mom = 0.0;
                for (int m : atoms) mom += lv.weights[m] * kernel[(m - mv + lv.M) % lv.M];
                best = std::max(best, mom);
            }
            row.push_back(best);
        }
        r.sup_moment.push_back(row);
    }
    std::vector<bool> pass(s_grid.size(), true);
    for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
        std::vector<double> gr;
        for (std::size_t i = 0; i < s_grid.size(); ++i) {
            double ratio = r.sup_moment[l + 1][i] / r.sup_moment[l][i];
            gr.push_back(ratio);
            if (!(ratio < std::pow(2.0, 0.5 * s_grid[i]))) pass[i] = false;
        }
        r.growth.push_back(gr);
    }
    std::vector<std::size_t> order(s_grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s_grid[a] < s_grid[b]; });
    for (auto i : order) {
        if (!pass[i]) break;
        r.estimate = std::max(r.estimate, s_grid[i]);
    }
    return r;
}

inline DimensionReport eta_dimension_estimate(const std::vector<SpectralData>& levels, const std::vector<double>& s_grid,
                                              const std::vector<double>& v_grid) {
    std::vector<AngleMeasure> etas;
    for (const auto& sd : levels) etas.push_back(project_eta(sd));
    return dimension_estimate(etas, s_grid, v_grid);
}

// Evaluates both sides of L_t^n(f ||A_*^{-n} u||^{-s}) = L_{t+s}^n f at random
// (x0, theta) by explicit preimage sums; returns the max absolute difference.
inline double exchange_identity_check(const Subshift& s, const OneStepCocycle& c, const GFunction& g, double t,
                                      double s_shift, std::size_t n, const OperatorGrid& f, std::size_t samples,
                                      std::uint64_t seed = 1) {
    if (c.d() != 2) throw Error(ErrorKind::DimensionUnsupported, "projective grid supports d = 2 only");
    if (n < 1 || n > 6) throw Error(ErrorKind::InvalidArgument, "exchange check needs 1 <= n <= 6");
    auto words = enumerate_words(s, n);
    std::vector<Matrix> adj, inv;
    std::vector<double> gin;
    for (const auto& w : words) {
        adj.push_back(adjoint_product(c, w));
        inv.push_back(inv_adjoint_product(c, w));
        gin.push_back(n > 1 ? g_product(g, w) : 1.0);
    }
    CounterRng rng(seed, 0x65786368);
    double worst = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        int x0 = int(rng() % std::uint64_t(s.q()));
        double theta = rng.uniform() * std::numbers::pi;
        Vector u(2);
        u << std::cos(theta), std::sin(theta);
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < words.size(); ++i) {
            const Word& w = words[i];
            if (!s.allowed(w.back(), x0)) continue;
            double gn = gin[i] * g(w.back(), x0);
            Vector v = adj[i] * u;
            double nv = v.norm();
            double fv = f.at(w[0], angle_of(v(0), v(1)));
            Vector back = inv[i] * (v / nv);
            lhs += gn * std::pow(nv, t) * fv * std::pow(back.norm(), -s_shift);
            rhs += gn * std::pow(nv, t + s_shift) * fv;
        }
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

struct DerivativeReport {
    double lhs = 0.0;          // central difference of log rho
    double rhs = 0.0;          // atom-sum integral
    double relative_gap = 0.0;
    std::size_t n = 0;
    double fd_step = 1e-4;
};

// rho'/rho against rho^{-n} sum nu_tilde sum_I g ||A^[n] u||^t (1/n) log||A^[n] u|| h.
// The integrand -(1/n) log||A_*^{-n} w|| at w = A^[n]u/||A^[n]u|| equals (1/n) log||A^[n]u||.
inline DerivativeReport derivative_consistency(const SpectralData& sd, const Subshift& s, const OneStepCocycle& c,
                                               const GFunction& g, std::size_t n, double fd_step = 1e-4) {
    DerivativeReport r;
    r.n = n;
    r.fd_step = fd_step;
    auto plus = leading_eigen(s, c, g, sd.t + fd_step, sd.M);
    auto minus = leading_eigen(s, c, g, sd.t - fd_step, sd.M);
    r.lhs = (plus.log_rho() - minus.log_rho()) / (2.0 * fd_step);
    auto w = detail::terminal_weights(sd, s, g);
    auto [cs, sn] = detail::node_trig(sd.M);
    auto parts = detail::scan_adjoint_products<double>(s, c, g, n, [&](const Word& word, const detail::AdjointNode& x) {
        return x.g_inner * detail::atom_sums(sd, w[word.back()], word[0], x, n, true, cs, sn).dlog;
    });
    double acc = 0.0;
    for (double v : parts) acc += v;
    r.rhs = std::exp(-double(n) * sd.log_rho()) * acc;
    double scale = std::max(std::abs(r.lhs), std::abs(r.rhs));
    r.relative_gap = scale > 0 ? std::abs(r.lhs - r.rhs) / scale : 0.0;
    return r;
}

// Mean d_P distance under nu_t between u and the window estimate of xi_* built
// from the first n symbols; a diagnostic for concentration on the xi_* graph.
inline double xi_graph_distance(const SpectralData& sd, const Subshift& s, const OneStepCocycle& c, const GFunction& g,
                                std::size_t n) {
    auto w = detail::terminal_weights(sd, s, g);
    auto [cs, sn] = detail::node_trig(sd.M);
    const double step = std::numbers::pi / sd.M;
    auto parts = detail::scan_adjoint_products<double>(s, c, g, n, [&](const Word& word, const detail::AdjointNode& x) {
        Matrix p(2, 2);
        p << x.p(0, 0), x.p(0, 1), x.p(1, 0), x.p(1, 1);
        auto sv = singular(p);
        if (sv.values(0) - sv.values(1) <= kDegenerateGap * sv.values(0)) return 0.0;
        ProjPoint xi(Vector(sv.left.col(0)));
        const double* hrow = sd.h.values.data() + std::size_t(word[0]) * sd.M;
        double acc = 0.0;
        for (int m = 0; m < sd.M; ++m) {
            double vx = p(0, 0) * cs[m] + p(0, 1) * sn[m];
            double vy = p(1, 0) * cs[m] + p(1, 1) * sn[m];
            double lognorm = 0.5 * std::log(vx * vx + vy * vy) + x.log_scale;
            double wt = sd.t == 0.0 ? 1.0 : std::exp(sd.t * lognorm);
            double th = angle_of(vx, vy);
            double xpos = th / step;
            double fl = std::floor(xpos);
            int k = int(fl) % sd.M;
            int k1 = k + 1 == sd.M ? 0 : k + 1;
            double hv = (1.0 - (xpos - fl)) * hrow[k] + (xpos - fl) * hrow[k1];
            double dd = std::abs(std::sin(th - std::atan2(xi.rep()(1), xi.rep()(0))));
            acc += w[word.back()][m] * wt * hv * dd;
        }
        return x.g_inner * acc;
    });
    double acc = 0.0;
    for (double v : parts) acc += v;
    return std::exp(-double(n) * sd.log_rho()) * acc;
}

struct RowSumReport {
    std::size_t samples = 0;
    std::size_t window = 0;
    double max_deviation = 0.0;
    double mean_deviation = 0.0;
    double max_xi_err = 0.0;
};

// Random admissible word of length n, uniform over allowed successors.
inline Word random_admissible_word(const Subshift& s, std::size_t n, CounterRng& rng) {
    Word w;
    w.push_back(Symbol(rng() % std::uint64_t(s.q())));
    while (w.size() < n) {
        std::vector<int> next;
        for (int b = 0; b < s.q(); ++b)
            if (s.allowed(w.back(), b)) next.push_back(b);
        w.push_back(Symbol(next[rng() % next.size()]));
    }
    return w;
}

// sum over a -> x0 of g_t(a x), with
// g_t(y) = g(y) exp(t phi(y)) h_t(y, xi(y)) / (rho_t h_t(x, xi(x))), phi(y) = -log||A_*^{-1}(y) xi(y)||.
inline RowSumReport g_t_rowsum_check(const SpectralData& sd, const Subshift& s, const OneStepCocycle& c,
                                     const GFunction& g, std::size_t xi_window, std::size_t samples,
                                     std::uint64_t seed = 1) {
    RowSumReport r;
    r.samples = samples;
    r.window = xi_window;
    const double t = sd.t;
    CounterRng rng(seed, 0x726f7773);
    double total_dev = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        Word x = random_admissible_word(s, xi_window + 1, rng);
        auto xi_x = estimate_xi_star(c, x, xi_window);
        r.max_xi_err = std::max(r.max_xi_err, xi_x.err_bound);
        double hx = sd.h.at(x[0], xi_x.dir.angle());
        double sum = 0.0;
        for (int a = 0; a < s.q(); ++a) {
            if (!s.allowed(a, x[0])) continue;
            Word y{Symbol(a)};
            y.insert(y.end(), x.begin(), x.end());
            auto xi_y = estimate_xi_star(c, y, xi_window);
            r.max_xi_err = std::max(r.max_xi_err, xi_y.err_bound);
            Matrix inv_adj = c[a].transpose().inverse();
            double phi = -std::log((inv_adj * xi_y.dir.rep()).norm());
            double hy = sd.h.at(a, xi_y.dir.angle());
            sum += g(a, x[0]) * std::exp(t * phi) * hy / (sd.rho * hx);
        }
        double dev = std::abs(sum - 1.0);
        r.max_deviation = std::max(r.max_deviation, dev);
        total_dev += dev;
    }
    r.mean_deviation = samples ? total_dev / double(samples) : 0.0;
    return r;
}

} // namespace thermo
