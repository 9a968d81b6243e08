#include "flagbundle/flag.hpp"

#include "flagbundle/linalg.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace flagbundle;
using fbtest::power_space;

namespace {

FlagOperator hardy_pair(int n_trunc, Poly psi) {
    std::vector<KernelSpace> sp{power_space(1, n_trunc), power_space(1, n_trunc)};
    return assemble_flag(sp, {CouplingSpec::poly(std::move(psi))});
}

}  // namespace

TEST_CASE("two Hardy blocks with identity coupling") {
    FlagOperator T = hardy_pair(16, Poly{Complex(1)});
    Mat B = backward_shift(power_space(1, 16)).entries;
    CHECK((T.block(0, 0) - B).norm() == 0.0);
    CHECK((T.block(1, 1) - B).norm() == 0.0);
    CHECK((T.block(0, 1) - Mat::Identity(16, 16)).norm() == 0.0);
}

TEST_CASE("three blocks without Condition (A) stay tridiagonal") {
    std::vector<KernelSpace> sp{power_space(1, 12), power_space(2, 12), power_space(3, 12)};
    FlagOperator T = assemble_flag(
        sp, {CouplingSpec::poly({Complex(1)}), CouplingSpec::poly({Complex(1), Complex(0.5)})});
    CHECK(T.is_ofb());
    CHECK(T.block(0, 2).norm() == 0.0);
}

TEST_CASE("constant Condition (A) entry is the scaled chain") {
    std::vector<KernelSpace> sp{power_space(1, 16), power_space(1, 16), power_space(1, 16)};
    Complex c(0.7, -0.2);
    FlagOperator T = assemble_flag(sp,
                                   {CouplingSpec::poly({Complex(1)}), CouplingSpec::poly({Complex(1)})},
                                   {{{0, 2}, Poly{c}}});
    Mat chain = T.coupling(0) * T.coupling(1);
    CHECK((T.block(0, 2) - c * chain).norm() < 1e-14);
}

TEST_CASE("zero couplings are rejected") {
    std::vector<KernelSpace> sp{power_space(1, 8), power_space(1, 8)};
    CHECK_THROWS_AS(assemble_flag(sp, {CouplingSpec::explicit_matrix(Mat::Zero(8, 8))}),
                    FlagViolation);
}

TEST_CASE("random couplings do not intertwine") {
    std::vector<KernelSpace> sp{power_space(1, 16), power_space(1, 16)};
    Mat R(16, 16);
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c) R(r, c) = fbtest::random_unit_box();
    CHECK_THROWS_AS(assemble_flag(sp, {CouplingSpec::explicit_matrix(R)}), FlagViolation);
}

TEST_CASE("verify_flag reports clean residuals for valid assemblies") {
    std::vector<KernelSpace> sp{power_space(1, 32), power_space(2, 32), power_space(2, 32)};
    FlagOperator T = assemble_flag(sp,
                                   {CouplingSpec::poly({Complex(2), Complex(1)}),
                                    CouplingSpec::poly({Complex(1), Complex(0), Complex(0.5)})},
                                   {{{0, 2}, Poly{Complex(0.3), Complex(0.1)}}});
    FlagCheckReport rep = verify_flag(T);
    CHECK(rep.ok(1e-12));
    for (double r : rep.coupling_residuals) CHECK(r < 1e-13);
    CHECK(rep.conditionA_residuals.at({0, 2}) < 1e-13);
}

TEST_CASE("block-diagonal unitary conjugation preserves the flag relations") {
    std::vector<KernelSpace> sp{power_space(1, 24), power_space(2, 24)};
    FlagOperator T = assemble_flag(sp, {CouplingSpec::poly({Complex(2), Complex(1)})});
    std::vector<Mat> U{fbtest::random_unitary(24), fbtest::random_unitary(24)};
    FlagOperator C = T.conjugated(U);
    FlagCheckReport rep = verify_flag(C);
    CHECK(rep.ok(1e-12));
    Mat expect = Mat::Zero(48, 48);
    expect.block(0, 0, 24, 24) = U[0] * T.diagonal(0) * U[0].adjoint();
    expect.block(0, 24, 24, 24) = U[0] * T.coupling(0) * U[1].adjoint();
    expect.block(24, 24, 24, 24) = U[1] * T.diagonal(1) * U[1].adjoint();
    CHECK((C.assembled() - expect).norm() < 1e-12);
}

TEST_CASE("ofb truncation drops exactly the higher entries") {
    std::vector<KernelSpace> sp{power_space(1, 8), power_space(1, 8), power_space(1, 8)};
    FlagOperator T = assemble_flag(sp,
                                   {CouplingSpec::poly({Complex(1)}), CouplingSpec::poly({Complex(1)})},
                                   {{{0, 2}, Poly{Complex(1)}}});
    FlagOperator T0 = T.ofb_truncation();
    CHECK(T0.is_ofb());
    CHECK(T0.block(0, 2).norm() == 0.0);
    CHECK((T0.block(0, 1) - T.block(0, 1)).norm() == 0.0);
    CHECK((T0.diagonal(2) - T.diagonal(2)).norm() == 0.0);
}
