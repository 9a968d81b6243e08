#include "flagbundle/poly.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace flagbundle {

int poly_degree(const Poly& p, double tol) {
    for (int k = static_cast<int>(p.size()) - 1; k >= 0; --k)
        if (std::abs(p[k]) > tol) return k;
    return -1;
}

Poly poly_add(const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()), Complex(0));
    for (std::size_t k = 0; k < a.size(); ++k) r[k] += a[k];
    for (std::size_t k = 0; k < b.size(); ++k) r[k] += b[k];
    return r;
}

Poly poly_scale(const Poly& a, Complex s) {
    Poly r = a;
    for (auto& c : r) c *= s;
    return r;
}

Poly poly_mul(const Poly& a, const Poly& b, int trunc) {
    if (a.empty() || b.empty()) return {};
    std::size_t full = a.size() + b.size() - 1;
    std::size_t n = trunc < 0 ? full : std::min<std::size_t>(full, trunc);
    Poly r(n, Complex(0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == Complex(0)) continue;
        std::size_t jmax = std::min(b.size(), n > i ? n - i : 0);
        for (std::size_t j = 0; j < jmax; ++j) r[i + j] += a[i] * b[j];
    }
    return r;
}

Complex poly_eval(const Poly& p, Complex z) {
    Complex acc(0);
    for (int k = static_cast<int>(p.size()) - 1; k >= 0; --k) acc = acc * z + p[k];
    return acc;
}

Poly poly_derivative(const Poly& p) {
    if (p.size() <= 1) return {Complex(0)};
    Poly r(p.size() - 1);
    for (std::size_t k = 1; k < p.size(); ++k) r[k - 1] = double(k) * p[k];
    return r;
}

Poly poly_conj_coeffs(const Poly& p) {
    Poly r = p;
    for (auto& c : r) c = std::conj(c);
    return r;
}

Poly series_reciprocal(const Poly& a, int n) {
    if (a.empty() || a[0] == Complex(0))
        throw DomainError("series_reciprocal: constant term vanishes");
    Poly b(n, Complex(0));
    b[0] = 1.0 / a[0];
    for (int k = 1; k < n; ++k) {
        Complex acc(0);
        for (int j = 1; j <= k && j < static_cast<int>(a.size()); ++j) acc += a[j] * b[k - j];
        b[k] = -acc / a[0];
    }
    return b;
}

Poly series_compose(const Poly& f, const Poly& g, int n) {
    Poly r(1, Complex(0));
    for (int k = static_cast<int>(f.size()) - 1; k >= 0; --k) {
        r = poly_mul(r, g, n);
        if (r.empty()) r.assign(1, Complex(0));
        r.resize(std::max<std::size_t>(r.size(), 1), Complex(0));
        r[0] += f[k];
    }
    r.resize(n, Complex(0));
    return r;
}

Poly mobius_series(Complex alpha, double theta, int n) {
    const Complex ab = std::conj(alpha);
    const Complex phase = std::exp(Complex(0, theta));
    // (alpha - w) * sum_k ab^k w^k
    Poly r(n, Complex(0));
    Complex abk(1);
    for (int k = 0; k < n; ++k) {
        r[k] += alpha * abk;
        if (k + 1 < n) r[k + 1] -= abk;
        abk *= ab;
    }
    for (auto& c : r) c *= phase;
    return r;
}

Poly mobius_derivative_series(Complex alpha, double theta, int n) {
    const Complex ab = std::conj(alpha);
    const Complex lead = std::exp(Complex(0, theta)) * (std::norm(alpha) - 1.0);
    // 1/(1-ab w)^2 = sum_k (k+1) ab^k w^k
    Poly r(n, Complex(0));
    Complex abk(1);
    for (int k = 0; k < n; ++k) {
        r[k] = lead * double(k + 1) * abk;
        abk *= ab;
    }
    return r;
}

std::vector<Complex> poly_roots(const Poly& p) {
    int deg = poly_degree(p);
    if (deg < 0) throw DomainError("poly_roots: zero polynomial");
    if (deg == 0) return {};
    Mat companion = Mat::Zero(deg, deg);
    for (int k = 0; k < deg; ++k) companion(k, deg - 1) = -p[k] / p[deg];
    for (int k = 1; k < deg; ++k) companion(k, k - 1) = 1.0;
    Eigen::ComplexEigenSolver<Mat> es(companion, /*computeEigenvectors=*/false);
    std::vector<Complex> roots(deg);
    for (int k = 0; k < deg; ++k) roots[k] = es.eigenvalues()(k);
    return roots;
}

Mat poly_apply(const Poly& p, const Mat& T) {
    const int n = static_cast<int>(T.rows());
    Mat acc = Mat::Zero(n, n);
    for (int k = static_cast<int>(p.size()) - 1; k >= 0; --k) {
        acc = acc * T;
        acc.diagonal().array() += p[k];
    }
    return acc;
}

}  // namespace flagbundle
