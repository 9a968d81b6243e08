#pragma once

#include "flagbundle/types.hpp"

namespace flagbundle {

// Truncated power-series / polynomial arithmetic on coefficient lists.
// A Poly of length n represents sum_{k<n} c_k z^k; operations that grow the
// degree take an explicit truncation length.

int poly_degree(const Poly& p, double tol = 0.0);  // -1 for the zero polynomial

Poly poly_add(const Poly& a, const Poly& b);
Poly poly_scale(const Poly& a, Complex s);
Poly poly_mul(const Poly& a, const Poly& b, int trunc = -1);

Complex poly_eval(const Poly& p, Complex z);
Poly poly_derivative(const Poly& p);

/// Coefficient-wise conjugate: psi-hat with psi_hat(w) = conj(psi(conj(w))).
Poly poly_conj_coeffs(const Poly& p);

/// 1/a as a power series of length n; requires a[0] != 0.
Poly series_reciprocal(const Poly& a, int n);

/// f(g) truncated to length n, f a (short) polynomial, g a series.
Poly series_compose(const Poly& f, const Poly& g, int n);

/// Power series of the Mobius map e^{i theta}(alpha - w)/(1 - conj(alpha) w).
Poly mobius_series(Complex alpha, double theta, int n);
/// Series of its derivative e^{i theta}(|alpha|^2 - 1)/(1 - conj(alpha) w)^2.
Poly mobius_derivative_series(Complex alpha, double theta, int n);

/// Roots of p via the companion matrix (leading/trailing handled; p must be nonzero).
std::vector<Complex> poly_roots(const Poly& p);

/// Horner evaluation of p at a square matrix.
Mat poly_apply(const Poly& p, const Mat& T);

}  // namespace flagbundle
