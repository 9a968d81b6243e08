#include "flagbundle/op_model.hpp"

#include "flagbundle/linalg.hpp"

#include <Eigen/LU>
#include <cmath>

namespace flagbundle {

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r *= double(n - k + j) / double(j);
    return r;
}

OperatorMatrix backward_shift(const KernelSpace& space) {
    const int n = space.truncation();
    if (n < 2) throw DomainError("backward_shift: truncation must be >= 2");
    Mat m = Mat::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k)
        m(k, k + 1) = std::sqrt(space.weight(k) / space.weight(k + 1));
    return {std::move(m), space, space};
}

OperatorMatrix multiplier(const KernelSpace& from, const KernelSpace& to, const Poly& psi) {
    const int deg = poly_degree(psi);
    if (deg >= std::min(from.truncation(), to.truncation()))
        throw DimensionError("multiplier: symbol degree exceeds truncation");
    Mat m = Mat::Zero(to.truncation(), from.truncation());
    for (int j = 0; j < from.truncation(); ++j)
        for (int d = 0; d <= deg && j + d < to.truncation(); ++d)
            m(j + d, j) = psi[d] * std::sqrt(from.weight(j) / to.weight(j + d));
    return {std::move(m), from, to};
}

OperatorMatrix composition_op_symbol(const KernelSpace& space, const Poly& g) {
    const int n = space.truncation();
    Mat m = Mat::Zero(n, n);
    Poly pow(1, Complex(1));  // g^0
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n && j < static_cast<int>(pow.size()); ++j)
            m(j, k) = pow[j] * std::sqrt(space.weight(k) / space.weight(j));
        pow = poly_mul(pow, g, n);
    }
    return {std::move(m), space, space};
}

OperatorMatrix composition_op(const KernelSpace& space, Complex alpha, double theta) {
    if (!(std::abs(alpha) < 1.0)) throw DomainError("composition_op: |alpha| must be < 1");
    return composition_op_symbol(space, mobius_series(alpha, theta, space.truncation()));
}

Mat mobius_calculus(const Mat& T, Complex alpha, double theta, int order) {
    if (T.rows() != T.cols()) throw DimensionError("mobius_calculus: square matrix required");
    if (order < 0 || order > 2) throw DomainError("mobius_calculus: order must be 0, 1 or 2");
    const int n = static_cast<int>(T.rows());
    const Complex phase = std::exp(Complex(0, theta));
    Mat A = Mat::Identity(n, n) - std::conj(alpha) * T;
    Eigen::PartialPivLU<Mat> lu(A);
    {
        // internal invariant: the truncated models are nilpotent-spectrum, so
        // I - conj(alpha) T stays invertible
        double rcond_proxy = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
        if (!(rcond_proxy > 0) || !std::isfinite(rcond_proxy))
            throw SingularityError("mobius_calculus: resolvent solve failed");
    }
    if (order == 0) {
        Mat num = alpha * Mat::Identity(n, n) - T;
        return phase * lu.solve(num);
    }
    Mat R = lu.solve(Mat::Identity(n, n));
    if (order == 1) return phase * (std::norm(alpha) - 1.0) * (R * R);
    return phase * 2.0 * std::conj(alpha) * (std::norm(alpha) - 1.0) * (R * R * R);
}

namespace {

Mat defect_square(const Mat& T, int k) {
    const int n = static_cast<int>(T.rows());
    Mat S = Mat::Zero(n, n);
    Mat Tj = Mat::Identity(n, n);
    double sign = 1.0;
    for (int j = 0; j <= k; ++j) {
        S += sign * binomial(k, j) * (Tj.adjoint() * Tj);
        sign = -sign;
        if (j < k) Tj = T * Tj;
    }
    return 0.5 * (S + S.adjoint());
}

}  // namespace

Mat defect_operator(const Mat& T, int k, double psd_tol) {
    if (T.rows() != T.cols()) throw DimensionError("defect_operator: square matrix required");
    if (k < 1) throw DomainError("defect_operator: order must be >= 1");
    double min_ev = 0.0;
    return hermitian_sqrt(defect_square(T, k), psd_tol, &min_ev);
}

int hypercontraction_order(const Mat& T, int max_k, int corner_per_power, double psd_tol) {
    if (max_k < 1) throw DomainError("hypercontraction_order: max_k must be >= 1");
    int order = 0;
    for (int k = 1; k <= max_k; ++k) {
        Mat S = corner(defect_square(T, k), k * corner_per_power);
        try {
            hermitian_sqrt(S, psd_tol);
        } catch (const NotHypercontraction&) {
            break;
        }
        order = k;
    }
    return order;
}

std::vector<Vec> agler_embedding(const Mat& T, int m, const Vec& x, double psd_tol) {
    Mat D = defect_operator(T, m, psd_tol);
    const int n = static_cast<int>(T.rows());
    std::vector<Vec> seq;
    seq.reserve(n);
    Vec v = x;
    for (int k = 0; k < n; ++k) {
        seq.push_back(D * v);
        v = T * v;
    }
    return seq;
}

double agler_weighted_norm_sq(const std::vector<Vec>& seq, int m) {
    double acc = 0.0;
    for (std::size_t k = 0; k < seq.size(); ++k)
        acc += binomial(m + static_cast<int>(k) - 1, static_cast<int>(k)) * seq[k].squaredNorm();
    return acc;
}

}  // namespace flagbundle
