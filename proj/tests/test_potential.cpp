#include "thermo/families.hpp"
#include "thermo/potential.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <random>

using namespace thermo;

namespace {

Subshift golden() { return new_subshift(2, {{1, 1}, {1, 0}}); }

// Perron data of B[a][b] = T[a][b] e^{psi(a)} straight from a dense eigensolver.
struct PerronOracle {
    double lambda;
    Vector left, right;  // left * right = 1
};

PerronOracle perron_oracle(const Subshift& s, const std::vector<double>& psi) {
    const int q = s.q();
    Matrix b = Matrix::Zero(q, q);
    for (int a = 0; a < q; ++a)
        for (int j = 0; j < q; ++j)
            if (s.allowed(a, j)) b(a, j) = std::exp(psi[a]);
    auto pick = [](const Matrix& m, double& lam) {
        Eigen::EigenSolver<Matrix> es(m);
        int best = 0;
        for (int i = 1; i < m.rows(); ++i)
            if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
        lam = es.eigenvalues()(best).real();
        Vector v = es.eigenvectors().col(best).real();
        return Vector(v / v.sum());
    };
    PerronOracle o;
    double l2;
    o.right = pick(b, o.lambda);
    o.left = pick(b.transpose(), l2);
    o.left /= o.left.dot(o.right);
    return o;
}

// mu[w] = l(w0) B(w0,w1)...B(w_{n-2},w_{n-1}) r(w_{n-1}) / lambda^{n-1}
double oracle_mass(const Subshift& s, const std::vector<double>& psi, const PerronOracle& o, const Word& w) {
    double m = o.left(w[0]) * o.right(w.back());
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
        if (!s.allowed(w[k], w[k + 1])) return 0.0;
        m *= std::exp(psi[w[k]]) / o.lambda;
    }
    return m;
}

} // namespace

TEST(Potential, ValidateTable) {
    auto s = golden();
    Potential::per_symbol({0.2, -0.1}).validate(s);
    Potential bad = Potential::per_symbol({0.2, std::nan("")});
    EXPECT_THROW(bad.validate(s), Error);
    Potential depth2;
    depth2.depth = 2;
    depth2.words = enumerate_words(s, 2);
    depth2.values = {0.1, 0.2, 0.3};
    depth2.validate(s);
    depth2.values.pop_back();
    EXPECT_THROW(depth2.validate(s), Error);
}

TEST(Rpf, FullShiftUniform) {
    auto g = rpf_solve(full_shift(3), Potential::zero(3));
    EXPECT_NEAR(g.log_lambda, std::log(3.0), 1e-14);
    for (int a = 0; a < 3; ++a)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(g(a, j), 1.0 / 3.0, 1e-14);
}

TEST(Rpf, GoldenMeanTopologicalEntropy) {
    auto g = rpf_solve(golden(), Potential::zero(2));
    EXPECT_NEAR(g.log_lambda, std::log((1 + std::sqrt(5.0)) / 2), 1e-14);
    EXPECT_EQ(g(1, 1), 0.0);
}

TEST(Rpf, BernoulliWeights) {
    std::vector<double> p{0.5, 0.3, 0.2};
    auto g = rpf_solve(full_shift(3), Potential::per_symbol({std::log(p[0]), std::log(p[1]), std::log(p[2])}));
    EXPECT_NEAR(g.log_lambda, 0.0, 1e-14);
    for (int a = 0; a < 3; ++a)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(g(a, j), p[a], 1e-13);
}

TEST(Rpf, MatchesEigenSolverAndRowSums) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Subshift> shifts{golden(), full_shift(3), new_subshift(3, {{1, 1, 0}, {0, 0, 1}, {1, 0, 0}}),
                                 new_subshift(4, {{1, 1, 0, 0}, {0, 1, 1, 0}, {0, 0, 1, 1}, {1, 0, 0, 1}})};
    for (const auto& s : shifts)
        for (int rep = 0; rep < 10; ++rep) {
            std::vector<double> psi(s.q());
            for (auto& v : psi) v = u(rng);
            auto g = rpf_solve(s, Potential::per_symbol(psi));
            auto o = perron_oracle(s, psi);
            EXPECT_NEAR(g.log_lambda, std::log(o.lambda), 1e-12);
            for (int j = 0; j < s.q(); ++j) {
                double col = 0.0;
                for (int a = 0; a < s.q(); ++a) {
                    if (s.allowed(a, j)) {
                        EXPECT_GT(g(a, j), 0.0);
                        col += g(a, j);
                    } else {
                        EXPECT_EQ(g(a, j), 0.0);
                    }
                }
                EXPECT_NEAR(col, 1.0, 1e-12);
            }
        }
}

TEST(GProduct, FullShiftPowers) {
    auto g = rpf_solve(full_shift(3), Potential::zero(3));
    EXPECT_NEAR(g_product(g, Word{0, 2, 1, 1, 0}), std::pow(3.0, -4), 1e-16);
    EXPECT_THROW(g_product(g, Word{1}), Error);
}

TEST(GProduct, BernoulliProduct) {
    std::vector<double> p{0.6, 0.4};
    auto g = rpf_solve(full_shift(2), Potential::per_symbol({std::log(p[0]), std::log(p[1])}));
    Word w{0, 1, 1, 0, 1};
    EXPECT_NEAR(g_product(g, w), p[0] * p[1] * p[1] * p[0], 1e-14);
}

TEST(GProduct, Multiplicative) {
    auto g = rpf_solve(golden(), Potential::per_symbol({0.2, -0.1}));
    auto words = enumerate_words(golden(), 9);
    for (const auto& w : words)
        for (std::size_t n = 1; n + 1 < w.size(); ++n) {
            Word head(w.begin(), w.begin() + std::ptrdiff_t(n) + 1);
            Word tail(w.begin() + std::ptrdiff_t(n), w.end());
            EXPECT_NEAR(g_product(g, w), g_product(g, head) * g_product(g, tail), 1e-14);
        }
}

TEST(GibbsMeasure, FullShiftUniform) {
    auto mu = gibbs_markov_measure(rpf_solve(full_shift(3), Potential::zero(3)), 2);
    ASSERT_EQ(mu.words.size(), 9u);
    for (double m : mu.masses) EXPECT_NEAR(m, 1.0 / 9.0, 1e-15);
}

TEST(GibbsMeasure, GoldenMeanSupport) {
    auto mu = gibbs_markov_measure(rpf_solve(golden(), Potential::zero(2)), 2);
    EXPECT_EQ(mu.mass(Word{1, 1}), 0.0);
    for (double m : mu.masses) EXPECT_GT(m, 0.0);
}

TEST(GibbsMeasure, MatchesTransferMatrixOracle) {
    std::vector<double> psi{0.2, -0.1};
    auto s = golden();
    auto g = rpf_solve(s, Potential::per_symbol(psi));
    auto o = perron_oracle(s, psi);
    for (std::size_t n = 1; n <= 8; ++n) {
        auto mu = gibbs_markov_measure(g, n);
        EXPECT_NEAR(mu.total(), 1.0, 1e-12);
        for (std::size_t i = 0; i < mu.words.size(); ++i)
            EXPECT_NEAR(mu.masses[i], oracle_mass(s, psi, o, mu.words[i]), 1e-13);
    }
}

TEST(GibbsMeasure, ConsistencyAndInvariance) {
    auto s = new_subshift(3, {{1, 1, 0}, {0, 1, 1}, {1, 1, 1}});
    auto g = rpf_solve(s, Potential::per_symbol({0.3, -0.2, 0.1}));
    for (std::size_t n = 2; n <= 7; ++n) {
        auto big = gibbs_markov_measure(g, n);
        auto small = gibbs_markov_measure(g, n - 1);
        auto pre = big.marginal_prefix();
        auto suf = big.marginal_suffix();
        ASSERT_EQ(pre.words, small.words);
        ASSERT_EQ(suf.words, small.words);
        for (std::size_t i = 0; i < small.words.size(); ++i) {
            EXPECT_NEAR(pre.masses[i], small.masses[i], 1e-12);
            EXPECT_NEAR(suf.masses[i], small.masses[i], 1e-12);
        }
    }
}

TEST(GibbsMeasure, SandwichConstantFromH) {
    std::vector<double> psi{0.2, -0.1};
    auto s = golden();
    auto g = rpf_solve(s, Potential::per_symbol(psi));
    auto pot = Potential::per_symbol(psi);
    double lo = 1e300, hi = 0.0;
    for (std::size_t n = 1; n <= 12; ++n) {
        auto mu = gibbs_markov_measure(g, n);
        for (std::size_t i = 0; i < mu.words.size(); ++i) {
            double r = mu.masses[i] / std::exp(-double(n) * g.log_lambda + birkhoff_sum(pot, mu.words[i]));
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
    }
    // The ratio depends only on the end symbols through the eigenvectors.
    auto o = perron_oracle(s, psi);
    double c = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            double r = o.left(a) * o.right(b) * o.lambda / std::exp(psi[b]);
            c = std::max({c, r, 1.0 / r});
        }
    EXPECT_GE(lo, 1.0 / c - 1e-12);
    EXPECT_LE(hi, c + 1e-12);
}

TEST(HigherBlock, PreservesPressure) {
    auto s = golden();
    Potential p2;
    p2.depth = 2;
    p2.words = enumerate_words(s, 2);  // 11 12 21
    p2.values = {0.4, -0.3, 0.1};
    auto c = shear_cocycle();
    auto hb = recode_higher_block(s, c, p2);
    EXPECT_EQ(hb.shift.q(), 3);
    // Pressure of a 2-block potential is log of the Perron value of T(a,b) e^{psi(ab)}.
    Matrix m = Matrix::Zero(2, 2);
    for (std::size_t i = 0; i < p2.words.size(); ++i) m(p2.words[i][0], p2.words[i][1]) = std::exp(p2.values[i]);
    Eigen::EigenSolver<Matrix> es(m);
    double lam = std::max(es.eigenvalues()(0).real(), es.eigenvalues()(1).real());
    EXPECT_NEAR(rpf_solve(hb.shift, hb.psi).log_lambda, std::log(lam), 1e-12);
    EXPECT_EQ(hb.cocycle[0], c[0]);
    EXPECT_EQ(hb.cocycle[2], c[1]);
}

TEST(PhiT, Examples) {
    auto s = full_shift(3);
    auto c = diagonal_swap_rotation_cocycle(2.0, 1.0 / std::sqrt(2.0));
    auto psi = Potential::zero(3);
    Word w{0, 1, 2, 0};
    EXPECT_EQ(phi_t(s, c, psi, w, 0.0), 0.0);
    auto p2 = Potential::per_symbol({0.5, 0.25, -1.0});
    EXPECT_DOUBLE_EQ(phi_t(s, c, p2, w, 0.0), 0.25);
    for (double t : {-3.0, 0.7})
        for (std::size_t n = 1; n <= 20; ++n) {
            EXPECT_NEAR(phi_t(s, c, psi, Word(n, 0), t), t * double(n) * std::log(2.0), 1e-12 * n);
            Word sw(n, 0);
            sw.push_back(1);
            sw.insert(sw.end(), n, 0);
            EXPECT_NEAR(phi_t(s, c, psi, sw, t), 0.0, 1e-12);
        }
    EXPECT_THROW(phi_t(golden(), shear_cocycle(), Potential::zero(2), Word{1, 1}, 0.5), Error);
}

TEST(PhiT, SuperadditiveForNegativeT) {
    auto s = full_shift(3);
    auto c = diagonal_swap_rotation_cocycle(2.0, 1.0 / std::sqrt(2.0));
    auto psi = Potential::per_symbol({0.1, 0.0, -0.2});
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> sym(0, 2);
    for (int rep = 0; rep < 300; ++rep) {
        Word i, j;
        for (int k = 0; k < 5; ++k) i.push_back(Symbol(sym(rng)));
        for (int k = 0; k < 4; ++k) j.push_back(Symbol(sym(rng)));
        Word ij = i;
        ij.insert(ij.end(), j.begin(), j.end());
        EXPECT_GE(phi_t(s, c, psi, ij, -1.5), phi_t(s, c, psi, i, -1.5) + phi_t(s, c, psi, j, -1.5) - 1e-12);
        EXPECT_LE(phi_t(s, c, psi, ij, 1.5), phi_t(s, c, psi, i, 1.5) + phi_t(s, c, psi, j, 1.5) + 1e-12);
    }
}
