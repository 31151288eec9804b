#include "thermo/families.hpp"
#include "thermo/typicality.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace thermo;

namespace {

OneStepCocycle prop91() { return diagonal_rotation_cocycle(2.0, 1.0 / std::sqrt(2.0)); }

// Twisting margin for p = "1" (diagonal, eigenbasis e1 e2) and a single
// connecting symbol with matrix R: X = D^{-1} R. Computed from closed-form
// 2x2 singular values, with no shared code.
double twisting_oracle(const Matrix& d, const Matrix& r) {
    Matrix x = d.inverse() * r;
    auto sv_min_rel = [](double a, double b, double c, double e) {
        // columns (a, c) and (b, e)
        double n1 = std::hypot(a, c), n2 = std::hypot(b, e);
        double fro2 = a * a + b * b + c * c + e * e;
        double det = std::abs(a * e - b * c);
        double disc = std::sqrt(std::max(0.0, fro2 * fro2 - 4 * det * det));
        double smin = std::sqrt(std::max(0.0, 0.5 * (fro2 - disc)));
        return smin / std::sqrt(n1 * n2);
    };
    double best = 1.0;  // single columns give exactly 1
    // I = {i}, J = {j}: columns X e_i and e_j
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double a = x(0, i), c = x(1, i);
            double b = j == 0 ? 1.0 : 0.0, e = j == 0 ? 0.0 : 1.0;
            best = std::min(best, sv_min_rel(a, b, c, e));
        }
    best = std::min(best, sv_min_rel(x(0, 0), x(0, 1), x(1, 0), x(1, 1)));
    best = std::min(best, sv_min_rel(1, 0, 0, 1));
    return best;
}

} // namespace

TEST(Condition1, Examples) {
    auto s = full_shift(2);
    auto r = check_condition1(s, prop91(), Word{0});
    ASSERT_TRUE(r.ok);
    EXPECT_NEAR(r.moduli[0], 2.0, 1e-14);
    EXPECT_NEAR(r.moduli[1], 0.5, 1e-14);
    EXPECT_FALSE(check_condition1(s, prop91(), Word{1}).ok);
    OneStepCocycle id({Matrix::Identity(2, 2), rotation(0.2)});
    EXPECT_FALSE(check_condition1(s, id, Word{0}).ok);
    auto golden = new_subshift(2, {{1, 1}, {1, 0}});
    EXPECT_THROW(check_condition1(golden, shear_cocycle(), Word{1}), Error);
}

TEST(Condition1, EigenvectorsAreEigenvectors) {
    auto s = full_shift(2);
    // 121 is elliptic (|trace| < 2); 1122 is hyperbolic.
    EXPECT_FALSE(check_condition1(s, prop91(), Word{0, 1, 0}).ok);
    Word p{0, 0, 1, 1};
    auto r = check_condition1(s, prop91(), p);
    ASSERT_TRUE(r.ok);
    Matrix P = product(prop91(), p);
    for (int k = 0; k < 2; ++k) {
        Vector v = r.eigvecs.col(k);
        Vector pv = P * v;
        EXPECT_NEAR(pv.norm(), r.moduli[k], 1e-12 * r.moduli[0]);
        EXPECT_NEAR(std::abs(pv.normalized().dot(v)), 1.0, 1e-12);
    }
}

TEST(Twisting, MatchesClosedForm) {
    auto s = full_shift(2);
    auto c = prop91();
    auto c1 = check_condition1(s, c, Word{0});
    auto tw = check_twisting(s, c, Word{0}, Word{1}, c1.eigvecs);
    EXPECT_TRUE(tw.ok);
    EXPECT_NEAR(tw.min_sv, twisting_oracle(c[0], c[1]), 1e-12);
    EXPECT_GT(tw.min_sv, 1e-3);
}

TEST(Twisting, DiagonalHolonomyFails) {
    auto s = full_shift(2);
    OneStepCocycle c({hyperbolic(2.0), hyperbolic(3.0)});
    auto c1 = check_condition1(s, c, Word{0});
    auto tw = check_twisting(s, c, Word{0}, Word{1}, c1.eigvecs);
    EXPECT_FALSE(tw.ok);
    EXPECT_LT(tw.min_sv, 1e-12);
}

TEST(Twisting, JunctionsChecked) {
    auto golden = new_subshift(2, {{1, 1}, {1, 0}});
    OneStepCocycle c({hyperbolic(2.0), rotation(0.1)});
    auto c1 = check_condition1(golden, c, Word{0});
    EXPECT_THROW(check_twisting(golden, c, Word{0}, Word{1, 1}, c1.eigvecs), Error);
}

TEST(Periodic, RotationDedup) {
    EXPECT_TRUE(is_rotation_minimal(Word{0, 0, 1}));
    EXPECT_FALSE(is_rotation_minimal(Word{0, 1, 0}));
    // Necklaces of length 4 over two letters: 6
    EXPECT_EQ(periodic_words(full_shift(2), 4).size(), 6u);
    auto golden = new_subshift(2, {{1, 1}, {1, 0}});
    for (const auto& w : periodic_words(golden, 5)) EXPECT_TRUE(golden.cyclically_admissible(w));
}

TEST(Certify, Prop91) {
    auto res = certify(full_shift(2), prop91());
    ASSERT_TRUE(res.certified);
    const auto& cert = *res.certificate;
    EXPECT_EQ(cert.p, Word{0});
    EXPECT_EQ(cert.z, Word{1});
    EXPECT_GT(cert.min_independence_sv, 1e-3);
    EXPECT_GT(cert.min_relative_gap, 1e-3);
    // Replayable.
    auto c1 = check_condition1(full_shift(2), prop91(), cert.p);
    auto tw = check_twisting(full_shift(2), prop91(), cert.p, cert.z, c1.eigvecs);
    EXPECT_EQ(tw.min_sv, cert.min_independence_sv);
}

TEST(Certify, Prop92) {
    auto res = certify(full_shift(3), diagonal_swap_rotation_cocycle(2.0, 1.0 / std::sqrt(2.0)));
    ASSERT_TRUE(res.certified);
    EXPECT_EQ(res.certificate->p, Word{0});
}

TEST(Certify, RotationOnlyInconclusive) {
    auto res = certify(full_shift(2), rotation_cocycle({0.1, 1.0 / std::sqrt(2.0)}));
    EXPECT_FALSE(res.certified);
    EXPECT_NE(res.reason.find("condition 1"), std::string::npos);
    EXPECT_NEAR(res.max_modulus_gap, 0.0, 1e-8);
    EXPECT_GT(res.periodic_tested, 0u);
    for (const auto& note : res.best_candidates) EXPECT_EQ(note.failed, "condition1");
}

TEST(Certify, Deterministic) {
    auto a = certify(full_shift(2), prop91(), 4, 4);
    auto b = certify(full_shift(2), prop91(), 4, 4);
    EXPECT_EQ(a.certificate->z, b.certificate->z);
    EXPECT_EQ(a.certificate->min_independence_sv, b.certificate->min_independence_sv);
    EXPECT_THROW(certify(full_shift(2), prop91(), 0, 4), Error);
}
