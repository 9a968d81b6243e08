#include "flagbundle/poly.hpp"
#include "flagbundle/homogeneity.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace flagbundle;

TEST_CASE("series reciprocal multiplies back to one") {
    Poly a = fbtest::random_poly(4);
    a[0] = Complex(1.3, -0.4);
    Poly b = series_reciprocal(a, 32);
    Poly prod = poly_mul(a, b, 32);
    CHECK(std::abs(prod[0] - Complex(1)) < 1e-13);
    for (std::size_t k = 1; k < prod.size(); ++k) CHECK(std::abs(prod[k]) < 1e-12);
}

TEST_CASE("compose evaluates pointwise") {
    Poly f{Complex(1), Complex(-2), Complex(0.5)};
    Poly g = mobius_series(Complex(0.3, 0.1), 0.7, 64);
    Poly fg = series_compose(f, g, 64);
    for (Complex w : {Complex(0.2, 0.1), Complex(-0.3, 0.25), Complex(0.0, 0.4)}) {
        Complex direct = poly_eval(f, poly_eval(g, w));
        CHECK(std::abs(poly_eval(fg, w) - direct) < 1e-10);
    }
}

TEST_CASE("mobius series match the closed maps") {
    Complex alpha(0.4, -0.2);
    double theta = 1.1;
    Poly phi = mobius_series(alpha, theta, 96);
    Poly dphi = mobius_derivative_series(alpha, theta, 96);
    Mobius m{alpha, theta};
    for (Complex w : {Complex(0.1, 0.2), Complex(-0.35, 0.1)}) {
        CHECK(std::abs(poly_eval(phi, w) - m(w)) < 1e-12);
        CHECK(std::abs(poly_eval(dphi, w) - m.derivative(w)) < 1e-12);
    }
}

TEST_CASE("roots of a factored polynomial") {
    // (z - 2)(z + 3) = -6 + z + z^2
    Poly p{Complex(-6), Complex(1), Complex(1)};
    auto roots = poly_roots(p);
    REQUIRE(roots.size() == 2);
    double best2 = 1e9, best3 = 1e9;
    for (Complex r : roots) {
        best2 = std::min(best2, std::abs(r - Complex(2)));
        best3 = std::min(best3, std::abs(r - Complex(-3)));
    }
    CHECK(best2 < 1e-10);
    CHECK(best3 < 1e-10);
}

TEST_CASE("poly_apply agrees with scalar evaluation on diagonal matrices") {
    Poly p = fbtest::random_poly(3);
    Mat D = Mat::Zero(4, 4);
    for (int k = 0; k < 4; ++k) D(k, k) = Complex(0.1 * k, 0.05);
    Mat P = poly_apply(p, D);
    for (int k = 0; k < 4; ++k) CHECK(std::abs(P(k, k) - poly_eval(p, D(k, k))) < 1e-13);
}

TEST_CASE("conjugate coefficients flip evaluation") {
    Poly p = fbtest::random_poly(4);
    Poly ph = poly_conj_coeffs(p);
    Complex w(0.3, -0.7);
    CHECK(std::abs(poly_eval(ph, w) - std::conj(poly_eval(p, std::conj(w)))) < 1e-13);
}
