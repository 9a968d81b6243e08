#pragma once

#include "flagbundle/kernel_space.hpp"
#include "flagbundle/poly.hpp"

namespace flagbundle {

/// Dense operator between two kernel spaces, stored in orthonormal-basis
/// coordinates so the adjoint is the conjugate transpose.
struct OperatorMatrix {
    Mat entries;        // codomain.truncation() x domain.truncation()
    KernelSpace domain;
    KernelSpace codomain;

    OperatorMatrix adjoint() const { return {entries.adjoint(), codomain, domain}; }

    /// Apply to a monomial-coordinate coefficient list, returning monomial coordinates.
    Vec apply_monomial(const Vec& f) const {
        return codomain.to_monomial(entries * domain.to_orthonormal(f));
    }
};

/// M_z^* in orthonormal coordinates: e_{k+1} -> sqrt(a_k/a_{k+1}) e_k, e_0 -> 0.
OperatorMatrix backward_shift(const KernelSpace& space);

/// Matrix of M_psi : from -> to; entry (j+m, j) = psi_m sqrt(a^from_j / a^to_{j+m}).
OperatorMatrix multiplier(const KernelSpace& from, const KernelSpace& to, const Poly& psi);

/// Composition operator C_g with an explicit analytic symbol (as a series);
/// column k holds the orthonormal coordinates of g(z)^k.
OperatorMatrix composition_op_symbol(const KernelSpace& space, const Poly& g);

/// C_phi for the Mobius map phi(z) = e^{i theta}(alpha - z)/(1 - conj(alpha) z).
OperatorMatrix composition_op(const KernelSpace& space, Complex alpha, double theta);

/// Rational functional calculus for the Mobius map and its first two derivatives:
/// order 0: e^{i theta}(alpha I - T)(I - conj(alpha) T)^{-1}
/// order 1: e^{i theta}(|alpha|^2 - 1)(I - conj(alpha) T)^{-2}
/// order 2: e^{i theta} 2 conj(alpha)(|alpha|^2 - 1)(I - conj(alpha) T)^{-3}
Mat mobius_calculus(const Mat& T, Complex alpha, double theta, int order);

/// Defect operator D_{k,T} = (sum_{j<=k} (-1)^j C(k,j) T*^j T^j)^{1/2}.
/// Throws NotHypercontraction (carrying the most negative eigenvalue) when the
/// sum dips below -psd_tol.
Mat defect_operator(const Mat& T, int k, double psd_tol = 1e-10);

/// Largest m <= max_k such that every defect up to order m exists, with the PSD
/// test run on the corner compressed by k*corner_per_power rows/columns.
int hypercontraction_order(const Mat& T, int max_k, int corner_per_power = 1,
                           double psd_tol = 1e-10);

/// Agler embedding sequence {D_{m,T} T^k x}_{k<N}.
std::vector<Vec> agler_embedding(const Mat& T, int m, const Vec& x, double psd_tol = 1e-10);

/// Weighted l2 norm sum_k C(m+k-1,k) ||f_k||^2 of an embedding sequence.
double agler_weighted_norm_sq(const std::vector<Vec>& seq, int m);

double binomial(int n, int k);

}  // namespace flagbundle
