#pragma once

#include "flagbundle/flag.hpp"
#include "flagbundle/intertwine.hpp"

namespace flagbundle {

/// Disc automorphism phi(z) = e^{i theta}(alpha - z)/(1 - conj(alpha) z).
struct Mobius {
    Complex alpha{0.0, 0.0};
    double theta = 0.0;

    Complex operator()(Complex z) const;
    Complex derivative(Complex z) const;

    Mobius inverse() const;
    Mobius compose(const Mobius& inner) const;  // this after inner: w -> this(inner(w))

    /// Coefficient-conjugated map z -> conj(phi(conj(z))).
    Mobius conj_coeffs() const;

    /// z -> e^{i beta} z as a member of the family (alpha = 0, theta = beta - pi).
    static Mobius rotation(double beta);
};

/// Structured Mobius image of a bidiagonal flag operator: diagonal phi(T_ii),
/// superdiagonal phi'(T_ii) T_{i,i+1}, band k >= 2 equal to
/// (1/k!) phi^{(k)}(T_ii) T_{i,i+1} ... T_{i+k-1,i+k}; cross-checked against the
/// rational calculus of the assembled matrix.
struct MobiusFlagResult {
    Mat rational;
    std::vector<Mat> diagonals;
    std::vector<Mat> couplings;
    std::vector<std::vector<Mat>> bands;  // bands[k-2][i] is the (i, i+k) block
    Mat structured;
    double agreement;  // relative corner deviation between the two routes
};

MobiusFlagResult mobius_of_flag(const FlagOperator& T, const Mobius& phi, double tol = 1e-9);

struct SymbolCertificate {
    Poly symbol;
    std::vector<Complex> roots;
    double min_root_modulus = 0.0;  // +inf for nonzero constants
    double grid_min_modulus = 0.0;
    bool non_vanishing = false;
    bool boundary_root = false;
};

struct WeakHomCertificate {
    std::vector<SymbolCertificate> symbols;
    bool weakly_homogeneous = false;
    bool root_exact = true;  // decided by polynomial roots, grid only corroborates
};

/// Theorem-5.1 criterion: each coupling symbol must have all roots strictly
/// outside the closed disc; boundary roots fail (a boundary zero propagates to
/// the whole circle). Zero symbols are rejected.
WeakHomCertificate weakhom_certificate(const std::vector<Poly>& symbols, int grid_density = 48);
WeakHomCertificate weakhom_certificate(const FlagOperator& T, int grid_density = 48);

struct WeakHomWitness {
    Mat X;
    double residual;  // ||X phi(T) - T X|| / (||T|| max(1, ||X||)), corner-compressed
    bool ok;
};

/// Explicit similarity witness X phi(T) = T X built from block-diagonal
/// factors (M_{h_i} C_{phi-hat})^* times the Lemma-3.6 reduction of phi(T).
/// Requires a positive certificate.
WeakHomWitness weakhom_witness(const FlagOperator& T, const Mobius& phi, double tol = 1e-5);

}  // namespace flagbundle
