// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "thermo/cocycle.hpp"
#include "thermo/common.hpp"
#include "thermo/parallel.hpp"
#include "thermo/potential.hpp"
#include "thermo/projective.hpp"
#include "thermo/sft.hpp"
#include "thermo/transfer.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace thermo {

struct MarkovChainSpec {
    Vector initial;
    Matrix transitions;

    void validate(const Subshift& s) const {
        const int q = s.q();
        if (initial.size() != q || transitions.rows() != q || transitions.cols() != q)
            throw Error(ErrorKind::InvalidArgument, "chain dimensions must match the alphabet");
        if (std::abs(initial.sum() - 1.0) > 1e-12 || initial.minCoeff() < 0)
            throw Error(ErrorKind::InvalidArgument, "initial distribution must be a probability vector");
        for (int a = 0; a < q; ++a) {
            if (std::abs(transitions.row(a).sum() - 1.0) > 1e-12)
                throw Error(ErrorKind::InvalidArgument, "transition rows must sum to 1");
            for (int b = 0; b < q; ++b) {
                if (transitions(a, b) < 0) throw Error(ErrorKind::InvalidArgument, "negative transition");
                if (!s.allowed(a, b) && transitions(a, b) != 0.0)
                    throw Error(ErrorKind::InvalidArgument, "transition on a forbidden edge");
            }
        }
    }

    static MarkovChainSpec bernoulli(const std::vector<double>& p) {
        const int q = int(p.size());
        MarkovChainSpec c;
        c.initial = Eigen::Map<const Vector>(p.data(), q);
        c.transitions.resize(q, q);
        for (int a = 0; a < q; ++a) c.transitions.row(a) = c.initial.transpose();
        return c;
    }

    // Stationary chain of the Gibbs measure built from g.
    static MarkovChainSpec gibbs(const GFunction& g) { return {g.stationary, g.forward_transitions()}; }

    // Parry (maximal entropy) chain.
    static MarkovChainSpec parry(const Subshift& s) { return gibbs(rpf_solve(s, Potential::zero(s.q()))); }
};

inline Vector stationary_distribution(const MarkovChainSpec& chain) {
    const Eigen::Index q = chain.transitions.rows();
    Matrix lazy = 0.5 * (chain.transitions + Matrix::Identity(q, q));
    Vector pi = Vector::Constant(q, 1.0 / double(q));
    for (int it = 0; it < 1000000; ++it) {
        Vector next = lazy.transpose() * pi;
        next /= next.sum();
        double change = (next - pi).cwiseAbs().sum();
        pi = next;
        if (change < 1e-15) break;
    }
    for (Eigen::Index i = 0; i < q; ++i)
        if (pi(i) < 1e-14) pi(i) = 0.0;
    return pi / pi.sum();
}

inline bool irreducible_on_support(const MarkovChainSpec& chain, const Vector& pi) {
    const Eigen::Index q = chain.transitions.rows();
    std::vector<int> support;
    for (Eigen::Index i = 0; i < q; ++i)
        if (pi(i) > 0) support.push_back(int(i));
    for (int start : support) {
        std::vector<char> seen(q, 0);
        std::vector<int> stack{start};
        seen[start] = 1;
        while (!stack.empty()) {
            int a = stack.back();
            stack.pop_back();
            for (Eigen::Index b = 0; b < q; ++b)
                if (chain.transitions(a, b) > 0 && !seen[b]) {
                    seen[b] = 1;
                    stack.push_back(int(b));
                }
        }
        for (int b : support)
            if (!seen[b]) return false;
    }
    return true;
}

inline double markov_entropy(const MarkovChainSpec& chain) {
    Vector pi = stationary_distribution(chain);
    if (!irreducible_on_support(chain, pi)) throw Error(ErrorKind::Reducible, "chain support is not irreducible");
    double h = 0.0;
    for (Eigen::Index i = 0; i < pi.size(); ++i) {
        if (pi(i) == 0) continue;
        for (Eigen::Index j = 0; j < pi.size(); ++j) {
            double p = chain.transitions(i, j);
            if (p > 0) h -= pi(i) * p * std::log(p);
        }
    }
    return h;
}

enum class LyapunovMethod { ExactCylinder, MonteCarlo };

struct LyapunovReport {
    double lambda1 = 0.0;
    double lambda2 = std::numeric_limits<double>::quiet_NaN();
    std::size_t n = 0;
    LyapunovMethod method = LyapunovMethod::ExactCylinder;
    double stderr1 = 0.0;
    double stderr2 = 0.0;
    std::size_t reps = 0;
};

inline LyapunovReport lyapunov_exact(const OneStepCocycle& c, const CylinderMeasure& mu) {
    LyapunovReport r;
    r.n = mu.n;
    double l1 = 0.0, lw = 0.0;
    for (std::size_t i = 0; i < mu.words.size(); ++i) {
        if (mu.masses[i] == 0.0) continue;
        auto p = scaled_product(c, mu.words[i]);
        l1 += mu.masses[i] * p.log_norm();
        if (c.d() >= 2) lw += mu.masses[i] * p.log_wedge();
    }
    r.lambda1 = l1 / double(mu.n);
    if (c.d() >= 2) r.lambda2 = (lw - l1) / double(mu.n);
    return r;
}

inline int sample_index(const double* probs, int q, double u) {
    double acc = 0.0;
    for (int i = 0; i < q; ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    for (int i = q - 1; i >= 0; --i)
        if (probs[i] > 0) return i;
    return q - 1;
}

inline Word sample_chain(const MarkovChainSpec& chain, std::size_t n, CounterRng& rng) {
    const int q = int(chain.initial.size());
    Matrix rows = chain.transitions;  // column-major; copy rows into a row-major buffer
    std::vector<double> buf(std::size_t(q) * q);
    for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b) buf[std::size_t(a) * q + b] = rows(a, b);
    Word w;
    w.reserve(n);
    w.push_back(Symbol(sample_index(chain.initial.data(), q, rng.uniform())));
    while (w.size() < n) w.push_back(Symbol(sample_index(buf.data() + std::size_t(w.back()) * q, q, rng.uniform())));
    return w;
}

// Each repetition draws from its own stream (seed, rep), so the report does not
// depend on the thread count.
inline LyapunovReport lyapunov_mc(const OneStepCocycle& c, const MarkovChainSpec& chain, std::size_t n, std::size_t reps,
                                  std::uint64_t seed) {
    if (n < 1 || reps < 1) throw Error(ErrorKind::InvalidArgument, "lyapunov_mc needs n >= 1 and reps >= 1");
    std::vector<double> e1(reps), e2(reps);
    parallel_for(reps, [&](std::size_t r) {
        CounterRng rng(seed, r);
        Word w = sample_chain(chain, n, rng);
        auto p = scaled_product(c, w);
        e1[r] = p.log_norm() / double(n);
        e2[r] = c.d() >= 2 ? (p.log_wedge() - p.log_norm()) / double(n) : 0.0;
    });
    auto stats = [&](const std::vector<double>& v, double& mean, double& se) {
        mean = 0.0;
        for (double x : v) mean += x;
        mean /= double(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        se = v.size() > 1 ? std::sqrt(var / double(v.size() - 1) / double(v.size())) : 0.0;
    };
    LyapunovReport r;
    r.n = n;
    r.reps = reps;
    r.method = LyapunovMethod::MonteCarlo;
    stats(e1, r.lambda1, r.stderr1);
    if (c.d() >= 2)
        stats(e2, r.lambda2, r.stderr2);
    else
        r.lambda2 = std::numeric_limits<double>::quiet_NaN();
    return r;
}

struct WitnessValue {
    double value = 0.0;
    double entropy = 0.0;
    double psi_integral = 0.0;
    double lambda1 = 0.0;
    double stderr = 0.0;
    bool exact = false;
};

struct WitnessOptions {
    std::size_t mc_length = 2000;
    std::size_t mc_reps = 64;
    std::uint64_t seed = 1;
};

inline bool is_orthogonal(const Matrix& a, double tol = 1e-12) {
    return (a.transpose() * a - Matrix::Identity(a.rows(), a.cols())).cwiseAbs().maxCoeff() <= tol;
}

// h(mu) + int psi dmu + t lambda_1(mu); exact when the chain only visits
// orthogonal generators (then lambda_1 = 0), Monte Carlo otherwise.
inline WitnessValue variational_witness(const Subshift& s, const OneStepCocycle& c, const Potential& psi, double t,
                                        const MarkovChainSpec& chain, const WitnessOptions& opt = {}) {
    chain.validate(s);
    WitnessValue w;
    w.entropy = markov_entropy(chain);
    Vector pi = stationary_distribution(chain);
    bool orthogonal = true;
    for (int a = 0; a < s.q(); ++a) {
        if (pi(a) == 0) continue;
        w.psi_integral += pi(a) * psi(a);
        orthogonal = orthogonal && is_orthogonal(c[a]);
    }
    if (orthogonal) {
        w.exact = true;
        w.lambda1 = 0.0;
    } else if (t != 0.0) {
        MarkovChainSpec stationary_chain{pi, chain.transitions};
        auto rep = lyapunov_mc(c, stationary_chain, opt.mc_length, opt.mc_reps, opt.seed);
        w.lambda1 = rep.lambda1;
        w.stderr = std::abs(t) * rep.stderr1;
    } else {
        w.exact = true;
    }
    w.value = w.entropy + w.psi_integral + t * w.lambda1;
    return w;
}

enum class LdpMode { Norm, VectorNorm, Gap, XiStarNorm };

inline const char* to_string(LdpMode m) {
    switch (m) {
    case LdpMode::Norm: return "norm";
    case LdpMode::VectorNorm: return "vector-norm";
    case LdpMode::Gap: return "gap";
    case LdpMode::XiStarNorm: return "xi-star-norm";
    }
    return "unknown";
}

inline LdpMode parse_ldp_mode(const std::string& s) {
    if (s == "norm") return LdpMode::Norm;
    if (s == "vector-norm") return LdpMode::VectorNorm;
    if (s == "gap") return LdpMode::Gap;
    if (s == "xi-star-norm") return LdpMode::XiStarNorm;
    throw Error(ErrorKind::Validation, "unknown ldp mode " + s);
}

struct LdpOptions {
    LdpMode mode = LdpMode::Norm;
    std::vector<double> v_angles{0.0, std::numbers::pi / 4, std::numbers::pi / 2, 3 * std::numbers::pi / 4};
    std::size_t xi_window = 6;
    // Reference exponents; NaN means estimate by Monte Carlo on the Gibbs chain.
    double lambda1 = std::numeric_limits<double>::quiet_NaN();
    double lambda2 = std::numeric_limits<double>::quiet_NaN();
    std::size_t mc_length = 4000;
    std::size_t mc_reps = 64;
    std::uint64_t seed = 1;
    const SpectralData* spectral = nullptr;  // use mu_t instead of mu_psi when set
};

struct LdpRow {
    std::size_t n;
    double mass;
};

struct LdpTable {
    LdpMode mode;
    double epsilon;
    double lambda1;
    double lambda2;
    std::vector<LdpRow> rows;
    double rate_fit = std::numeric_limits<double>::quiet_NaN();  // least-squares slope of log mass in n
    bool negative = false;
    bool empty_flagged = false;  // some n had zero deviation mass
    double xi_err_bound = 0.0;   // worst window gap in xi-star mode
    double xi_degenerate_mass = 0.0;  // largest per-n mass of cylinders whose window has no gap
};

inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double k = double(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= k;
    my /= k;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

inline LdpTable ldp_tail_rates(const Subshift& s, const OneStepCocycle& c, const GFunction& g, double epsilon,
                               std::size_t n_min, std::size_t n_max, const LdpOptions& opt = {}) {
    if (!(epsilon > 0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
    if (n_min < 1 || n_max < n_min) throw Error(ErrorKind::InvalidArgument, "bad n range");
    LdpTable tab;
    tab.mode = opt.mode;
    tab.epsilon = epsilon;
    tab.lambda1 = opt.lambda1;
    tab.lambda2 = opt.lambda2;
    if (std::isnan(tab.lambda1) || (opt.mode == LdpMode::Gap && std::isnan(tab.lambda2))) {
        auto rep = lyapunov_mc(c, MarkovChainSpec::gibbs(g), opt.mc_length, opt.mc_reps, opt.seed);
        if (std::isnan(tab.lambda1)) tab.lambda1 = rep.lambda1;
        if (std::isnan(tab.lambda2)) tab.lambda2 = rep.lambda2;
    }
    const std::size_t extra = opt.mode == LdpMode::XiStarNorm ? opt.xi_window : 0;
    for (std::size_t n = n_min; n <= n_max; ++n) {
        const std::size_t depth = n + extra;
        CylinderMeasure mu = opt.spectral ? mu_t_cylinders(*opt.spectral, s, c, g, depth).measure
                                          : gibbs_markov_measure(g, depth);
        std::vector<double> mass_by_v(opt.mode == LdpMode::VectorNorm ? opt.v_angles.size() : 1, 0.0);
        double degenerate = 0.0;
        for (std::size_t i = 0; i < mu.words.size(); ++i) {
            const Word& full = mu.words[i];
            Word w(full.begin(), full.begin() + std::ptrdiff_t(n));
            switch (opt.mode) {
            case LdpMode::Norm: {
                double v = scaled_adjoint_product(c, w).log_norm() / double(n);
                if (std::abs(v - tab.lambda1) > epsilon) mass_by_v[0] += mu.masses[i];
                break;
            }
            case LdpMode::VectorNorm: {
                auto p = scaled_product(c, w);
                for (std::size_t k = 0; k < opt.v_angles.size(); ++k) {
                    Vector v(c.d());
                    v.setZero();
                    v(0) = std::cos(opt.v_angles[k]);
                    if (c.d() > 1) v(1) = std::sin(opt.v_angles[k]);
                    double val = (p.log_scale() + std::log((p.m * v).norm())) / double(n);
                    if (std::abs(val - tab.lambda1) > epsilon) mass_by_v[k] += mu.masses[i];
                }
                break;
            }
            case LdpMode::Gap: {
                auto p = scaled_adjoint_product(c, w);
                double val = std::log(singular(p.m).gap()) / double(n);
                if (std::abs(val - (tab.lambda2 - tab.lambda1)) > epsilon) mass_by_v[0] += mu.masses[i];
                break;
            }
            case LdpMode::XiStarNorm: {
                Word tail(full.begin() + std::ptrdiff_t(n), full.end());
                // Tails without a singular gap (e.g. pure rotations) have no window
                // estimate; their mass is left out and reported.
                auto head = scaled_adjoint_product(c, tail);
                auto sv = singular(head.m);
                if (sv.values(0) - sv.values(1) <= kDegenerateGap * sv.values(0)) {
                    degenerate += mu.masses[i];
                    break;
                }
                auto xi = estimate_xi_star(c, tail, opt.xi_window);
                tab.xi_err_bound = std::max(tab.xi_err_bound, xi.err_bound);
                auto p = scaled_adjoint_product(c, w);
                double val = (p.log_scale() + std::log((p.m * xi.dir.rep()).norm())) / double(n);
                if (std::abs(val - tab.lambda1) > epsilon) mass_by_v[0] += mu.masses[i];
                break;
            }
            }
        }
        double mass = *std::max_element(mass_by_v.begin(), mass_by_v.end());
        tab.xi_degenerate_mass = std::max(tab.xi_degenerate_mass, degenerate);
        tab.rows.push_back({n, mass});
    }
    std::vector<double> xs, ys;
    for (const auto& r : tab.rows) {
        if (r.mass > 0) {
            xs.push_back(double(r.n));
            ys.push_back(std::log(r.mass));
        } else {
            tab.empty_flagged = true;
        }
    }
    if (xs.size() >= 2) tab.rate_fit = least_squares_slope(xs, ys);
    tab.negative = tab.rate_fit < 0;
    return tab;
}

} // namespace thermo
