// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "thermo/cocycle.hpp"
#include "thermo/common.hpp"
#include "thermo/sft.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

namespace thermo {

// Locally constant potential. For depth k the table is aligned with
// enumerate_words(s, k).
struct Potential {
    int depth = 1;
    std::vector<Word> words;
    std::vector<double> values;

    static Potential per_symbol(std::vector<double> v) {
        Potential p;
        p.depth = 1;
        for (std::size_t a = 0; a < v.size(); ++a) p.words.push_back(Word{Symbol(a)});
        p.values = std::move(v);
        return p;
    }

    static Potential zero(int q) { return per_symbol(std::vector<double>(q, 0.0)); }

    double operator()(int symbol) const { return values[std::size_t(symbol)]; }

    void validate(const Subshift& s) const {
        if (depth < 1) throw Error(ErrorKind::InvalidArgument, "potential depth must be >= 1");
        auto expected = enumerate_words(s, std::size_t(depth));
        if (expected != words || values.size() != words.size())
            throw Error(ErrorKind::InvalidArgument, "potential table must cover exactly the admissible words");
        for (double v : values)
            if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "potential values must be finite");
    }
};

struct HigherBlock {
    Subshift shift;
    OneStepCocycle cocycle;
    Potential psi;
    std::vector<Word> blocks;  // new symbol b stands for blocks[b]
};

// k-block recoding: symbols are admissible k-words, W -> W' allowed when they
// overlap in k-1 places; the cocycle and potential read the block's first symbol.
inline HigherBlock recode_higher_block(const Subshift& s, const OneStepCocycle& c, const Potential& psi) {
    psi.validate(s);
    HigherBlock out;
    out.blocks = psi.words;
    const std::size_t r = out.blocks.size();
    if (r > 255) throw Error(ErrorKind::InvalidArgument, "higher-block alphabet exceeds 255 symbols");
    std::vector<std::vector<int>> adj(r, std::vector<int>(r, 0));
    for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = 0; b < r; ++b) {
            const auto& x = out.blocks[a];
            const auto& y = out.blocks[b];
            bool ok = std::equal(x.begin() + 1, x.end(), y.begin(), y.end() - 1);
            if (x.size() == 1) ok = s.allowed(x[0], y[0]);
            adj[a][b] = ok;
        }
    out.shift = new_subshift(int(r), adj);
    std::vector<Matrix> mats;
    for (const auto& w : out.blocks) mats.push_back(c[w[0]]);
    out.cocycle = OneStepCocycle(std::move(mats));
    out.psi = Potential::per_symbol(psi.values);
    return out;
}

struct GFunction {
    Subshift shift;
    Matrix weights;  // weights(a, j) = g(a -> j), zero where a j is not admissible
    double log_lambda = 0.0;
    Vector h;        // left Perron vector, sums to 1
    Vector psi;
    Vector stationary;  // one-symbol marginal of the Gibbs measure
    std::size_t iterations = 0;

    int q() const { return shift.q(); }
    double operator()(int a, int j) const { return weights(a, j); }

    // Forward transition probabilities of the Gibbs Markov chain.
    Matrix forward_transitions() const {
        Matrix p = Matrix::Zero(q(), q());
        for (int a = 0; a < q(); ++a)
            for (int b = 0; b < q(); ++b)
                if (shift.allowed(a, b)) p(a, b) = weights(a, b) * stationary(b) / stationary(a);
        for (int a = 0; a < q(); ++a) p.row(a) /= p.row(a).sum();
        return p;
    }
};

namespace detail {
// Perron vector of a nonnegative primitive matrix by shifted power iteration.
inline std::pair<double, Vector> perron_right(const Matrix& b, double tol, std::size_t max_iter, std::size_t& iters) {
    const Eigen::Index q = b.rows();
    double shift = b.maxCoeff();
    Matrix k = b + shift * Matrix::Identity(q, q);
    Vector v = Vector::Constant(q, 1.0 / double(q));
    double mu = 0.0;
    for (iters = 1; iters <= max_iter; ++iters) {
        Vector w = k * v;
        double s = w.sum();
        w /= s;
        double change = (w - v).cwiseAbs().maxCoeff() / w.cwiseAbs().maxCoeff();
        v = w;
        mu = s;
        if (change <= tol) break;
    }
    if (iters > max_iter) throw Error(ErrorKind::NoConvergence, "Perron iteration did not converge");
    Vector bv = b * v;
    double lambda = bv.sum() / v.sum();
    (void)mu;
    return {lambda, v};
}
} // namespace detail

inline GFunction rpf_solve(const Subshift& s, const Potential& psi) {
    if (psi.depth != 1) throw Error(ErrorKind::InvalidArgument, "rpf_solve needs a depth-1 potential");
    if (int(psi.values.size()) != s.q()) throw Error(ErrorKind::InvalidArgument, "potential size must equal q");
    const int q = s.q();
    Matrix bt = Matrix::Zero(q, q);  // transpose of B[a][j] = T[a][j] e^{psi(a)}
    for (int a = 0; a < q; ++a)
        for (int j = 0; j < q; ++j)
            if (s.allowed(a, j)) bt(j, a) = std::exp(psi(a));
    GFunction g;
    g.shift = s;
    g.psi = Eigen::Map<const Vector>(psi.values.data(), q);
    auto [lambda, h] = detail::perron_right(bt, 1e-14, 1000000, g.iterations);
    g.log_lambda = std::log(lambda);
    g.h = h / h.sum();
    g.weights = Matrix::Zero(q, q);
    for (int j = 0; j < q; ++j) {
        double col = 0.0;
        for (int a = 0; a < q; ++a)
            if (s.allowed(a, j)) {
                g.weights(a, j) = std::exp(psi(a)) * g.h(a) / (lambda * g.h(j));
                col += g.weights(a, j);
            }
        if (std::abs(col - 1.0) > 1e-10)
            throw Error(ErrorKind::NoConvergence, "g row sum off by " + std::to_string(col - 1.0));
        g.weights.col(j) /= col;
    }
    // Stationary vector: g pi = pi, solved directly.
    Matrix sys = g.weights - Matrix::Identity(q, q);
    sys.row(q - 1).setOnes();
    Vector rhs = Vector::Zero(q);
    rhs(q - 1) = 1.0;
    g.stationary = sys.fullPivLu().solve(rhs);
    return g;
}

// g^(n) on an (n+1)-word: prod_{k<n} g(w_k -> w_{k+1}).
inline double g_product(const GFunction& g, const Word& w) {
    if (w.size() < 2) throw Error(ErrorKind::InvalidArgument, "g_product needs a word of length n+1 >= 2");
    double p = 1.0;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) p *= g(w[k], w[k + 1]);
    return p;
}

struct CylinderMeasure {
    std::size_t n = 0;
    std::vector<Word> words;  // lexicographic
    std::vector<double> masses;

    double mass(const Word& w) const {
        auto it = std::lower_bound(words.begin(), words.end(), w);
        if (it == words.end() || *it != w) return 0.0;
        return masses[std::size_t(it - words.begin())];
    }

    double total() const {
        double s = 0.0;
        for (double m : masses) s += m;
        return s;
    }

    // Drops the last symbol.
    CylinderMeasure marginal_prefix() const {
        std::map<Word, double> acc;
        for (std::size_t i = 0; i < words.size(); ++i)
            acc[Word(words[i].begin(), words[i].end() - 1)] += masses[i];
        return from_map(n - 1, acc);
    }

    // Drops the first symbol.
    CylinderMeasure marginal_suffix() const {
        std::map<Word, double> acc;
        for (std::size_t i = 0; i < words.size(); ++i)
            acc[Word(words[i].begin() + 1, words[i].end())] += masses[i];
        return from_map(n - 1, acc);
    }

    static CylinderMeasure from_map(std::size_t n, const std::map<Word, double>& acc) {
        CylinderMeasure out;
        out.n = n;
        for (const auto& [w, m] : acc) {
            out.words.push_back(w);
            out.masses.push_back(m);
        }
        return out;
    }
};

inline double markov_cylinder_mass(const Vector& initial, const Matrix& p, const Word& w) {
    double m = initial(w[0]);
    for (std::size_t k = 1; k < w.size(); ++k) m *= p(w[k - 1], w[k]);
    return m;
}

inline CylinderMeasure gibbs_markov_measure(const GFunction& g, std::size_t n) {
    CylinderMeasure out;
    out.n = n;
    Matrix p = g.forward_transitions();
    for_each_word(g.shift, n, [&](const Word& w) {
        out.words.push_back(w);
        out.masses.push_back(markov_cylinder_mass(g.stationary, p, w));
    });
    return out;
}

inline double birkhoff_sum(const Potential& psi, const Word& w) {
    double s = 0.0;
    for (auto a : w) s += psi(a);
    return s;
}

inline double phi_t(const Subshift& s, const OneStepCocycle& c, const Potential& psi, const Word& w, double t) {
    if (!s.admissible(w) || w.empty()) throw Error(ErrorKind::InvalidArgument, "phi_t needs a nonempty admissible word");
    double v = birkhoff_sum(psi, w);
    if (t != 0.0) v += t * log_norm(c, w);
    return v;
}

} // namespace thermo
