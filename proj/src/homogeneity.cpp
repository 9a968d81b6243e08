#include "flagbundle/homogeneity.hpp"

#include "flagbundle/linalg.hpp"

#include <Eigen/LU>
#include <cmath>

namespace flagbundle {

Complex Mobius::operator()(Complex z) const {
    return std::exp(Complex(0, theta)) * (alpha - z) / (1.0 - std::conj(alpha) * z);
}

Complex Mobius::derivative(Complex z) const {
    Complex den = 1.0 - std::conj(alpha) * z;
    return std::exp(Complex(0, theta)) * (std::norm(alpha) - 1.0) / (den * den);
}

Mobius Mobius::inverse() const {
    return {std::exp(Complex(0, theta)) * alpha, -theta};
}

Mobius Mobius::compose(const Mobius& inner) const {
    // as fractional-linear matrices [[a, b], [c, d]], phi = (az+b)/(cz+d)
    const Complex e1 = std::exp(Complex(0, theta)), e2 = std::exp(Complex(0, inner.theta));
    Complex a1 = -e1, b1 = e1 * alpha, c1 = -std::conj(alpha), d1 = 1.0;
    Complex a2 = -e2, b2 = e2 * inner.alpha, c2 = -std::conj(inner.alpha), d2 = 1.0;
    // |a| = |e2 - alpha1 conj(alpha2)| >= 1 - |alpha1||alpha2| > 0
    Complex a = a1 * a2 + b1 * c2, b = a1 * b2 + b1 * d2;
    Complex d = c1 * b2 + d1 * d2;
    return {-b / a, std::arg(-a / d)};
}

Mobius Mobius::conj_coeffs() const { return {std::conj(alpha), -theta}; }

Mobius Mobius::rotation(double beta) { return {Complex(0, 0), beta - M_PI}; }

MobiusFlagResult mobius_of_flag(const FlagOperator& T, const Mobius& phi, double tol) {
    if (!T.is_ofb())
        throw DomainError("mobius_of_flag: bidiagonal (strongly-flag) input required");
    const int n = T.block_count();
    const int dim = T.block_dim();
    MobiusFlagResult out;
    out.rational = mobius_calculus(T.assembled(), phi.alpha, phi.theta, 0);

    const Complex ab = std::conj(phi.alpha);
    const Complex lead = std::exp(Complex(0, phi.theta)) * (std::norm(phi.alpha) - 1.0);
    out.diagonals.resize(n);
    std::vector<Mat> resolvent(n);  // (I - conj(alpha) T_ii)^{-1}
    for (int i = 0; i < n; ++i) {
        Mat Ai = Mat::Identity(dim, dim) - ab * T.diagonal(i);
        resolvent[i] = Ai.partialPivLu().solve(Mat::Identity(dim, dim));
        out.diagonals[i] = mobius_calculus(T.diagonal(i), phi.alpha, phi.theta, 0);
    }
    out.couplings.resize(std::max(0, n - 1));
    for (int i = 0; i + 1 < n; ++i)
        out.couplings[i] = (lead * (resolvent[i] * resolvent[i])) * T.coupling(i);

    // band k >= 2: (1/k!) phi^{(k)}(T_ii) = lead * ab^{k-1} R_i^{k+1}
    out.bands.clear();
    for (int k = 2; k < n; ++k) {
        std::vector<Mat> band(n - k);
        for (int i = 0; i + k < n; ++i) {
            Mat factor = lead * std::pow(ab, k - 1) * resolvent[i];
            for (int p = 1; p <= k; ++p) factor = factor * resolvent[i];
            Mat chain = T.coupling(i);
            for (int l = i + 1; l < i + k; ++l) chain = chain * T.coupling(l);
            band[i] = factor * chain;
        }
        out.bands.push_back(std::move(band));
    }

    out.structured = Mat::Zero(n * dim, n * dim);
    for (int i = 0; i < n; ++i) out.structured.block(i * dim, i * dim, dim, dim) = out.diagonals[i];
    for (int i = 0; i + 1 < n; ++i)
        out.structured.block(i * dim, (i + 1) * dim, dim, dim) = out.couplings[i];
    for (int k = 2; k < n; ++k)
        for (int i = 0; i + k < n; ++i)
            out.structured.block(i * dim, (i + k) * dim, dim, dim) = out.bands[k - 2][i];

    int budget = n * T.symbol_degree_budget() + 1;
    double scale = std::max(operator_norm(out.rational), 1e-300);
    out.agreement = corner_residual(out.rational, out.structured, budget, scale);
    if (out.agreement > tol)
        throw Error("mobius_of_flag: structured and rational routes disagree beyond tolerance");
    return out;
}

namespace {

SymbolCertificate certify_symbol(const Poly& psi, int grid_density) {
    if (poly_degree(psi) < 0)
        throw DomainError("weakhom_certificate: zero coupling symbol violates the non-zero hypothesis");
    SymbolCertificate cert;
    cert.symbol = psi;
    cert.min_root_modulus = std::numeric_limits<double>::infinity();
    if (poly_degree(psi) > 0) {
        cert.roots = poly_roots(psi);
        for (Complex r : cert.roots)
            cert.min_root_modulus = std::min(cert.min_root_modulus, std::abs(r));
    }
    cert.boundary_root = std::abs(cert.min_root_modulus - 1.0) <= 1e-9;
    cert.non_vanishing = cert.min_root_modulus > 1.0 + 1e-9;

    cert.grid_min_modulus = std::numeric_limits<double>::infinity();
    for (int rr = 0; rr <= grid_density; ++rr) {
        double r = double(rr) / grid_density;
        int na = std::max(8, 4 * grid_density);
        for (int a = 0; a < na; ++a) {
            Complex w = std::polar(r, 2 * M_PI * a / na);
            cert.grid_min_modulus = std::min(cert.grid_min_modulus, std::abs(poly_eval(psi, w)));
        }
    }
    return cert;
}

}  // namespace

WeakHomCertificate weakhom_certificate(const std::vector<Poly>& symbols, int grid_density) {
    WeakHomCertificate out;
    out.weakly_homogeneous = true;
    for (const Poly& psi : symbols) {
        out.symbols.push_back(certify_symbol(psi, grid_density));
        out.weakly_homogeneous = out.weakly_homogeneous && out.symbols.back().non_vanishing;
    }
    return out;
}

WeakHomCertificate weakhom_certificate(const FlagOperator& T, int grid_density) {
    std::vector<Poly> symbols;
    for (int i = 0; i + 1 < T.block_count(); ++i) {
        if (!T.coupling_symbol(i))
            throw DomainError("weakhom_certificate: polynomial coupling symbols required");
        symbols.push_back(*T.coupling_symbol(i));
    }
    return weakhom_certificate(symbols, grid_density);
}

WeakHomWitness weakhom_witness(const FlagOperator& T, const Mobius& phi, double tol) {
    if (!T.is_ofb()) throw DomainError("weakhom_witness: bidiagonal input required");
    const int n = T.block_count();
    const int dim = T.block_dim();
    WeakHomCertificate cert = weakhom_certificate(T);
    if (!cert.weakly_homogeneous)
        throw DomainError("weakhom_witness: certificate negative, witness refused");
    for (int i = 0; i < n; ++i)
        if (!T.space(i)) throw DomainError("weakhom_witness: kernel-backed blocks required");

    MobiusFlagResult F = mobius_of_flag(T, phi);

    // rho_i(w) = prod_{k>=i} psi_hat_k(phi(w)) / (psi_hat_k(w) phi'(w)), the
    // section multiplier of the block-diagonal factor X_i = C_{phi-hat}^* M_{h_i}^*.
    Poly phi_series = mobius_series(phi.alpha, phi.theta, dim);
    Poly dphi_series = mobius_derivative_series(phi.alpha, phi.theta, dim);
    Poly dphi_inv = series_reciprocal(dphi_series, dim);

    std::vector<Mat> blocks(n);
    Poly rho{Complex(1)};
    {
        Mat C = composition_op(*T.space(n - 1), phi.conj_coeffs().alpha, phi.conj_coeffs().theta)
                    .entries;
        blocks[n - 1] = C.adjoint();
    }
    for (int i = n - 2; i >= 0; --i) {
        Poly psi_hat = poly_conj_coeffs(*T.coupling_symbol(i));
        Poly num = series_compose(psi_hat, phi_series, dim);
        Poly den_inv = series_reciprocal(psi_hat, dim);
        rho = poly_mul(rho, poly_mul(num, poly_mul(den_inv, dphi_inv, dim), dim), dim);
        Mat Mh = multiplier(*T.space(i), *T.space(i), poly_conj_coeffs(rho)).entries;
        Mat C = composition_op(*T.space(i), phi.conj_coeffs().alpha, phi.conj_coeffs().theta)
                    .entries;
        blocks[i] = C.adjoint() * Mh.adjoint();
    }
    Mat Xbd = Mat::Zero(n * dim, n * dim);
    for (int i = 0; i < n; ++i) Xbd.block(i * dim, i * dim, dim, dim) = blocks[i];

    // Lemma-3.6 reduction of phi(T): its condition-(A) symbols relative to the
    // original diagonals are mu_k(z) = [conj(alpha) e^{-i theta} (1 - conj(alpha) z)
    // / (|alpha|^2 - 1)]^{k-1}; they vanish identically for rotations.
    Mat W_inv = Mat::Identity(n * dim, n * dim);
    if (n >= 3 && std::abs(phi.alpha) > 0.0) {
        const Complex ab = std::conj(phi.alpha);
        const Complex beta = ab * std::exp(Complex(0, -phi.theta)) / (std::norm(phi.alpha) - 1.0);
        Poly base{beta, -beta * ab};  // beta (1 - conj(alpha) z)
        ConditionAData condA;
        Poly mu{Complex(1)};
        for (int k = 2; k < n; ++k) {
            mu = poly_mul(mu, base);
            for (int i = 0; i + k < n; ++i) condA[{i, i + k}] = mu;
        }
        std::vector<Mat> diag_orig(n);
        for (int i = 0; i < n; ++i) diag_orig[i] = T.diagonal(i);
        // the mu symbols are evaluated at the original diagonals, so the
        // condition-(A) completion is exactly the structured phi(T)
        FlagOperator phiT_flag(std::vector<std::optional<KernelSpace>>(n), F.diagonals,
                               F.couplings, std::vector<std::optional<Poly>>(n - 1), condA,
                               F.structured);
        UnipotentWitness W = build_intertwiner(phiT_flag, &diag_orig);
        W_inv = W.X_inv;
    }

    WeakHomWitness out;
    out.X = Xbd * W_inv;
    double scale = std::max(operator_norm(T.assembled()), 1e-300) *
                   std::max(1.0, operator_norm(out.X));
    out.residual = block_corner_residual(out.X * F.rational, T.assembled() * out.X, n, dim,
                                         T.symbol_degree_budget() + 2, scale);
    out.ok = out.residual <= tol;
    return out;
}

}  // namespace flagbundle
