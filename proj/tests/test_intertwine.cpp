#include "flagbundle/intertwine.hpp"

#include "flagbundle/linalg.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace flagbundle;
using fbtest::power_space;

namespace {

FlagOperator chain_flag(const std::vector<double>& lambdas, const std::vector<Poly>& psis,
                        const ConditionAData& condA, int n_trunc = 64) {
    std::vector<KernelSpace> sp;
    for (double l : lambdas) sp.push_back(power_space(l, n_trunc));
    std::vector<CouplingSpec> cs;
    for (const Poly& p : psis) cs.push_back(CouplingSpec::poly(p));
    return assemble_flag(sp, cs, condA);
}

ConditionAData random_condA(int n, int max_deg = 3) {
    ConditionAData condA;
    for (int i = 0; i < n; ++i)
        for (int j = i + 2; j < n; ++j) condA[{i, j}] = fbtest::random_poly(max_deg);
    return condA;
}

}  // namespace

TEST_CASE("n=3 closed form") {
    SUBCASE("phi = 0 gives the self-intertwiner") {
        FlagOperator T = chain_flag({1, 1, 1}, {{Complex(1)}, {Complex(1)}}, {});
        UnipotentWitness w = build_K_n3(T);
        const int d = T.block_dim();
        CHECK((w.K.block(0, d, d, d) - T.coupling(0)).norm() < 1e-14);
        CHECK(w.K.block(0, 2 * d, d, d).norm() == 0.0);
        CHECK((w.K.block(d, 2 * d, d, d) - T.coupling(1)).norm() < 1e-14);
        Mat comm = w.X * T.assembled() - T.assembled() * w.X;
        CHECK(operator_norm(comm) < 1e-13 * operator_norm(T.assembled()));
    }
    SUBCASE("constant phi_{1,3} rescales the first coupling") {
        Complex c(0.4, 0.3);
        FlagOperator T = chain_flag({1, 2, 2}, {{Complex(1), Complex(0.5)}, {Complex(2)}},
                                    {{{0, 2}, Poly{c}}});
        UnipotentWitness w = build_K_n3(T);
        const int d = T.block_dim();
        CHECK((w.K.block(0, d, d, d) - (1.0 + c) * T.coupling(0)).norm() < 1e-13);
        // K_{2,3} = T_{2,3} exactly
        CHECK((w.K.block(d, 2 * d, d, d) - T.coupling(1)).norm() == 0.0);
        CHECK(w.residual < 1e-10);
    }
}

TEST_CASE("general construction reproduces the n=3 closed form") {
    FlagOperator T = chain_flag({1, 1, 2}, {{Complex(1)}, {Complex(1), Complex(1)}},
                                {{{0, 2}, fbtest::random_poly(2)}});
    UnipotentWitness a = build_K_n3(T);
    UnipotentWitness b = build_intertwiner(T);
    CHECK((a.K - b.K).norm() < 1e-13 * std::max(1.0, a.K.norm()));
}

TEST_CASE("n=4 with a single higher entry") {
    Complex c(0.8, -0.1);
    FlagOperator T = chain_flag({1, 1, 1, 1},
                                {{Complex(1)}, {Complex(1)}, {Complex(1)}},
                                {{{0, 2}, Poly{c}}});
    UnipotentWitness w = build_intertwiner(T);
    CHECK(w.residual < 1e-10);
}

TEST_CASE("n=5 with random polynomial data") {
    FlagOperator T = chain_flag({1, 1, 2, 2, 3},
                                {{Complex(1)}, {Complex(1), Complex(0.3)}, {Complex(2)}, {Complex(1)}},
                                random_condA(5));
    UnipotentWitness w = build_intertwiner(T);
    CHECK(w.residual < 1e-9);
    for (const auto& [key, r] : w.level_residuals) CHECK(r <= 1e-10);
    // X and X^{-1} are block upper triangular with identity diagonal
    const int d = T.block_dim();
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j <= i; ++j) {
            Mat expect = (i == j) ? Mat(Mat::Identity(d, d)) : Mat(Mat::Zero(d, d));
            CHECK((w.X_inv.block(i * d, j * d, d, d) - expect).norm() < 1e-12);
        }
    double scale = operator_norm(w.X) * operator_norm(w.X_inv);
    CHECK(operator_norm(w.X * w.X_inv - Mat::Identity(5 * d, 5 * d)) < 1e-13 * scale);
}

TEST_CASE("invert_unipotent") {
    const int d = 6;
    CHECK((invert_unipotent(Mat::Identity(2 * d, 2 * d), 2, d) - Mat::Identity(2 * d, 2 * d))
              .norm() == 0.0);

    Mat K = Mat::Zero(2 * d, 2 * d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) K(r, d + c) = fbtest::random_unit_box();
    Mat X = Mat::Identity(2 * d, 2 * d) + K;
    CHECK((invert_unipotent(X, 2, d) - (Mat::Identity(2 * d, 2 * d) - K)).norm() == 0.0);

    Mat K4 = Mat::Zero(4 * d, 4 * d);
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c) K4(i * d + r, j * d + c) = fbtest::random_unit_box();
    Mat X4 = Mat::Identity(4 * d, 4 * d) + K4;
    Mat inv = invert_unipotent(X4, 4, d);
    double scale = operator_norm(X4) * operator_norm(inv);
    CHECK(operator_norm(X4 * inv - Mat::Identity(4 * d, 4 * d)) < 1e-13 * scale);

    Mat bad = Mat::Identity(2 * d, 2 * d);
    bad(d, 0) = 0.5;  // lower block
    CHECK_THROWS_AS(invert_unipotent(bad, 2, d), DomainError);
}

TEST_CASE("reduction to strongly-flag form") {
    FlagOperator T = chain_flag({1, 2, 1}, {{Complex(1)}, {Complex(1), Complex(0.4)}},
                                {{{0, 2}, Poly{Complex(0.5), Complex(0.2)}}});
    auto [ofb, w] = reduce_to_ofb(T);
    CHECK(ofb.is_ofb());
    CHECK((ofb.diagonal(0) - T.diagonal(0)).norm() == 0.0);
    CHECK((ofb.coupling(1) - T.coupling(1)).norm() == 0.0);
    CHECK(w.residual < 1e-10);

    // idempotence: a strongly-flag input comes back unchanged with a commuting X
    FlagOperator S = chain_flag({1, 1, 1}, {{Complex(1)}, {Complex(2)}}, {});
    auto [ofb2, w2] = reduce_to_ofb(S);
    CHECK((ofb2.assembled() - S.assembled()).norm() == 0.0);
    Mat comm = w2.X * S.assembled() - S.assembled() * w2.X;
    CHECK(operator_norm(comm) < 1e-13 * operator_norm(S.assembled()));
}

TEST_CASE("witness residuals survive block-diagonal unitary conjugation") {
    FlagOperator T = chain_flag({1, 1, 2}, {{Complex(1)}, {Complex(1), Complex(0.5)}},
                                {{{0, 2}, Poly{Complex(0.3)}}}, 48);
    UnipotentWitness w = build_intertwiner(T);
    std::vector<Mat> U;
    for (int i = 0; i < 3; ++i) U.push_back(fbtest::random_unitary(48));
    FlagOperator C = T.conjugated(U);
    UnipotentWitness wc = build_intertwiner(C);
    CHECK(std::abs(w.residual - wc.residual) < 1e-9);
}

TEST_CASE("witness composition") {
    const int d = 32;
    FlagOperator base = chain_flag({1, 1, 1}, {{Complex(1)}, {Complex(1), Complex(0.5)}}, {}, d);
    // two condition-(A) completions of the same strongly-flag pair
    FlagOperator A1 = chain_flag({1, 1, 1}, {{Complex(1)}, {Complex(1), Complex(0.5)}},
                                 {{{0, 2}, Poly{Complex(0.7)}}}, d);
    FlagOperator B1 = chain_flag({1, 1, 1}, {{Complex(1)}, {Complex(1), Complex(0.5)}},
                                 {{{0, 2}, Poly{Complex(-0.2), Complex(0.4)}}}, d);
    UnipotentWitness y = build_intertwiner(A1);  // base -> A1
    UnipotentWitness z = build_intertwiner(B1);  // base -> B1
    Mat I = Mat::Identity(3 * d, 3 * d);

    SUBCASE("identity witnesses compose to the identity") {
        ComposedWitness cw = compose_witnesses(I, I, I, base.assembled(), base.assembled());
        CHECK((cw.X - I).norm() == 0.0);
        CHECK(cw.residual < 1e-14);
    }
    SUBCASE("planted chain between the two completions") {
        ComposedWitness cw =
            compose_witnesses(I, y.X, z.X, A1.assembled(), B1.assembled(), 12);
        CHECK(cw.residual < 1e-8);
    }
    SUBCASE("a witness composed with its own inverse direction is the identity") {
        ComposedWitness cw =
            compose_witnesses(y.X, I, y.X_inv, base.assembled(), base.assembled(), 12);
        CHECK((cw.X - I).norm() < 1e-12 * operator_norm(y.X));
    }
}
