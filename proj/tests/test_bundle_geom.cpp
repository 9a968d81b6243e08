#include "flagbundle/bundle_geom.hpp"

#include "flagbundle/linalg.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace flagbundle;
using fbtest::power_space;

namespace {

FlagOperator power_pair(double l1, double l2, Poly psi, int n_trunc = 128) {
    std::vector<KernelSpace> sp{power_space(l1, n_trunc), power_space(l2, n_trunc)};
    return assemble_flag(sp, {CouplingSpec::poly(std::move(psi))});
}

// closed second-fundamental-form value for a lambda/lambda pair with symbol psi:
// theta = K / sqrt(1/|psi-hat(w)|^2 - K), K = -lambda (1-|w|^2)^{-2}
double sff_oracle(double lambda, const Poly& psi, Complex w) {
    double K = -lambda * std::pow(1.0 - std::norm(w), -2.0);
    double r = std::norm(poly_eval(poly_conj_coeffs(psi), w));
    return K / std::sqrt(1.0 / r - K);
}

}  // namespace

TEST_CASE("eigen sections") {
    KernelSpace hardy = power_space(1, 128);
    Vec s0 = eigen_section(hardy, 0);
    CHECK(std::abs(s0(0) - Complex(1)) == 0.0);
    CHECK(s0.tail(127).norm() == 0.0);

    Vec s = eigen_section(hardy, 0.5);
    for (int k = 0; k < 10; ++k) CHECK(std::abs(s(k) - std::pow(Complex(0.5), k)) < 1e-15);
    Mat B = backward_shift(hardy).entries;
    Vec ortho = hardy.to_orthonormal(s);
    CHECK((B * ortho - 0.5 * ortho).norm() < 1e-8 * ortho.norm());

    Complex w(0.3, 0.4);
    CHECK(std::abs(hardy.coeff_inner(eigen_section(hardy, w), eigen_section(hardy, w)) -
                   Complex(hardy.section_norm_sq(w))) < 1e-12);
}

TEST_CASE("frame chain with identity coupling duplicates the section") {
    FlagOperator T = power_pair(1, 1, Poly{Complex(1)}, 64);
    FrameEvaluation fe = FrameEvaluator(T).frame(Complex(0.2, 0.1));
    CHECK((fe.sections[0] - fe.sections[1]).norm() < 1e-15);
}

TEST_CASE("coupling ratio is the squared symbol modulus for equal blocks") {
    FlagOperator T = power_pair(1, 1, Poly{Complex(2), Complex(1)});
    // adjoint-multiplier chain: t_0(w) = conj(psi(conj(w))) K(., conj(w))
    CHECK(coupling_ratio(T, 0, 0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(coupling_ratio(T, 0, 0.3) == doctest::Approx(std::norm(Complex(2.3))).epsilon(1e-10));
    Complex w(0.2, -0.1);
    double expect = std::norm(poly_eval(poly_conj_coeffs(Poly{Complex(2), Complex(1)}), w));
    CHECK(coupling_ratio(T, 0, w) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("coupling ratio scales by |c|^2 and is 1 for identity couplings") {
    FlagOperator T1 = power_pair(1, 1, Poly{Complex(1)});
    for (Complex w : {Complex(0), Complex(0.5, 0.2)})
        CHECK(coupling_ratio(T1, 0, w) == doctest::Approx(1.0).epsilon(1e-12));
    Complex c(0.4, 1.1);
    FlagOperator Tc = power_pair(1, 1, Poly{c});
    CHECK(coupling_ratio(Tc, 0, 0.37) == doctest::Approx(std::norm(c)).epsilon(1e-12));
}

TEST_CASE("vanishing coupling symbol degenerates the frame") {
    FlagOperator T = power_pair(1, 1, Poly{Complex(0), Complex(1)});  // psi = z
    CHECK_THROWS_AS(FrameEvaluator(T).frame(0), DegenerateFrame);
    CHECK(coupling_ratio(T, 0, 0.5) == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("frame residuals stay below the eigen-tail bound") {
    FlagOperator T = power_pair(2, 2, Poly{Complex(1), Complex(0.5)});
    FrameEvaluator ev(T);
    for (double r : {0.1, 0.5, 0.85}) {
        FrameEvaluation fe = ev.frame(Complex(r, 0.0));
        for (int b = 0; b < 2; ++b) CHECK(fe.residuals[b] < 1e-8 * fe.norms[b]);
    }
    // at radius 0.9 the default truncation tail dominates; N = 256 restores it
    FlagOperator T2 = power_pair(2, 2, Poly{Complex(1), Complex(0.5)}, 256);
    FrameEvaluation fe = FrameEvaluator(T2).frame(Complex(0.9, 0.0));
    for (int b = 0; b < 2; ++b) CHECK(fe.residuals[b] < 1e-8 * fe.norms[b]);
}

TEST_CASE("curvature of the power models") {
    for (double lambda : {1.0, 2.0}) {
        KernelSpace sp = power_space(lambda, 128);
        NormProvider f = [sp](Complex w) { return sp.section_norm_sq(w); };
        CHECK(curvature(f, 0, 1e-3) == doctest::Approx(-lambda).epsilon(1e-6));
    }
    KernelSpace hardy = power_space(1, 128);
    NormProvider f = [hardy](Complex w) { return hardy.section_norm_sq(w); };
    CHECK(curvature(f, 0.5) == doctest::Approx(-16.0 / 9.0).epsilon(1e-5));
}

TEST_CASE("curvature matches the closed form on the default grid") {
    for (double lambda : {1.0, 2.0, 3.0}) {
        KernelSpace sp = power_space(lambda, 128);
        NormProvider f = [sp](Complex w) { return sp.section_norm_sq(w); };
        for (const auto& pt : PolarGrid::default_grid().entries()) {
            double closed = -lambda * std::pow(1.0 - pt.r * pt.r, -2.0);
            CHECK(std::abs(curvature(f, pt.w) - closed) < 1e-5);
        }
    }
}

TEST_CASE("curvature rejects non-positive norms") {
    NormProvider bad = [](Complex w) { return w.real() > 0.1 ? -1.0 : 1.0; };
    CHECK_THROWS_AS(curvature(bad, Complex(0.1, 0)), DegenerateFrame);
}

TEST_CASE("curvature derivative stencils") {
    KernelSpace sp = power_space(1, 128);
    NormProvider f = [sp](Complex w) { return sp.section_norm_sq(w); };
    CHECK(std::abs(curvature_derivatives(f, 0, 1, 0, 1e-2)) < 1e-4);  // radial symmetry
    Complex k11 = curvature_derivatives(f, 0, 1, 1, 1e-2);
    CHECK(std::abs(k11 - Complex(-2.0)) < 1e-3);
    Complex k00 = curvature_derivatives(f, Complex(0.2, 0.1), 0, 0, 1e-3);
    CHECK(k00.real() == doctest::Approx(curvature(f, Complex(0.2, 0.1), 1e-3)).epsilon(1e-14));
    CHECK(k00.imag() == 0.0);
    // conjugate symmetry of the mixed stencils on real-valued log-norms
    Complex k10 = curvature_derivatives(f, Complex(0.3, 0.2), 1, 0, 1e-2);
    Complex k01 = curvature_derivatives(f, Complex(0.3, 0.2), 0, 1, 1e-2);
    CHECK(std::abs(k10 - std::conj(k01)) < 1e-14);
}

TEST_CASE("gram matrix of the frame") {
    FlagOperator T1 = power_pair(2, 2, Poly{Complex(1)}, 64);
    FrameEvaluation fe = FrameEvaluator(T1).frame(Complex(0.4, 0.1));
    Mat G = gram_matrix(fe);
    CHECK(G.rows() == 2);
    CHECK(std::abs(G(0, 1)) == 0.0);  // different summands are orthogonal
    CHECK(std::abs(G(1, 0)) == 0.0);
    CHECK(G(0, 0).real() == doctest::Approx(fe.norms[0] * fe.norms[0]));

    FlagOperator T2 = power_pair(1, 1, Poly{Complex(1)}, 64);
    FrameEvaluation f0 = FrameEvaluator(T2).frame(0);
    Mat G0 = gram_matrix(f0);
    CHECK(G0(0, 0).real() == doctest::Approx(1.0));
    CHECK(G0(1, 1).real() == doctest::Approx(1.0));
}

TEST_CASE("second fundamental form closed values") {
    FlagOperator T = power_pair(1, 1, Poly{Complex(1)});
    CHECK(second_fundamental_form(T, 0, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-5));

    FlagOperator T2 = power_pair(1, 1, Poly{Complex(2), Complex(1)});
    double expect = sff_oracle(1.0, Poly{Complex(2), Complex(1)}, 0);  // -2/sqrt(5)
    CHECK(expect == doctest::Approx(-2.0 / std::sqrt(5.0)).epsilon(1e-12));
    CHECK(second_fundamental_form(T2, 0, 0) == doctest::Approx(expect).epsilon(1e-5));

    // scaling the coupling by a unimodular constant leaves theta unchanged
    Complex u = std::polar(1.0, 0.9);
    FlagOperator Tu = power_pair(1, 1, Poly{u * Complex(2), u * Complex(1)});
    CHECK(second_fundamental_form(Tu, 0, 0.25) ==
          doctest::Approx(second_fundamental_form(T2, 0, 0.25)).epsilon(1e-9));
}

TEST_CASE("gram-schmidt route agrees with the closed route") {
    for (double lambda : {1.0, 2.0}) {
        Poly psi{Complex(2), Complex(1)};
        FlagOperator T = power_pair(lambda, lambda, psi);
        for (Complex w : {Complex(0), Complex(0.3, 0), Complex(0.2, -0.35)}) {
            auto [g1, g2] = normalized_frame_pair(T, 0);
            double gs = sff_gram_schmidt(g1, g2, w);
            double closed = second_fundamental_form(T, 0, w);
            CHECK(std::abs(gs - closed) < 1e-4);
            CHECK(std::abs(gs - sff_oracle(lambda, psi, w)) < 1e-4);
        }
    }
}

TEST_CASE("gram-schmidt route rejects non-normalized frames") {
    FlagOperator T = power_pair(1, 1, Poly{Complex(1)});
    auto [g1, g2] = normalized_frame_pair(T, 0);
    CHECK_THROWS_AS(sff_gram_schmidt(g1, g1, Complex(0.2, 0.1)), InvalidFrame);
}

TEST_CASE("frame scaling by |p(w)|^2 barely moves the curvature") {
    KernelSpace sp = power_space(2, 128);
    Poly p{Complex(1), Complex(0.5, 0.2)};
    NormProvider base = [sp](Complex w) { return sp.section_norm_sq(w); };
    NormProvider scaled = [sp, p](Complex w) {
        return std::norm(poly_eval(p, w)) * sp.section_norm_sq(w);
    };
    for (Complex w : {Complex(0.1, 0), Complex(0.4, 0.3), Complex(-0.6, 0.1)})
        CHECK(std::abs(curvature(base, w) - curvature(scaled, w)) < 1e-5);
}

TEST_CASE("block-diagonal unitary conjugation leaves the geometry unchanged") {
    const double h = 1e-2;  // larger step: identical truncation error cancels, rounding stays tiny
    FlagOperator T = power_pair(2, 1, Poly{Complex(2), Complex(1)}, 96);
    std::vector<Mat> U{fbtest::random_unitary(96), fbtest::random_unitary(96)};
    FlagOperator C = T.conjugated(U);
    FrameEvaluator evT(T), evC(C);
    for (Complex w : {Complex(0.2, 0), Complex(0.35, 0.4), Complex(-0.5, 0.1)}) {
        CHECK(std::abs(curvature(evT.last_block_norm_sq(), w, h) -
                       curvature(evC.last_block_norm_sq(), w, h)) < 1e-9);
        CHECK(coupling_ratio(T, 0, w) == doctest::Approx(coupling_ratio(C, 0, w)).epsilon(1e-9));
        CHECK(second_fundamental_form(T, 0, w, h) ==
              doctest::Approx(second_fundamental_form(C, 0, w, h)).epsilon(1e-9));
    }
}
