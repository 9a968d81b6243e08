#include "flagbundle/kernel_space.hpp"

#include <cmath>

namespace flagbundle {

WeightSequence WeightSequence::power(double lambda, int n) { return power_weights(lambda, n); }

WeightSequence WeightSequence::explicit_weights(std::vector<double> w) {
    WeightSequence s;
    s.weights = std::move(w);
    s.tag = WeightTag::Explicit;
    for (double a : s.weights)
        if (!(a > 0.0)) throw DomainError("explicit weights must be strictly positive");
    if (s.weights.empty()) throw DomainError("weight sequence must be non-empty");
    return s;
}

WeightSequence power_weights(double lambda, int n) {
    if (!(lambda > 0.0)) throw DomainError("power_weights: lambda must be > 0");
    if (n < 2) throw DomainError("power_weights: need at least 2 terms");
    WeightSequence s;
    s.tag = WeightTag::Power;
    s.lambda = lambda;
    s.weights.resize(n);
    s.weights[0] = 1.0;
    for (int k = 0; k + 1 < n; ++k)
        s.weights[k + 1] = s.weights[k] * (lambda + k) / (k + 1);
    return s;
}

KernelSpace::KernelSpace(WeightSequence w) : weights_(std::move(w)) {
    if (weights_.weights.empty()) throw DomainError("kernel space needs a non-empty weight list");
    for (double a : weights_.weights)
        if (!(a > 0.0)) throw DomainError("kernel weights must be strictly positive");
}

Complex KernelSpace::kernel_eval(Complex z, Complex w) const {
    const Complex q = z * std::conj(w);
    Complex acc(0), qk(1);
    for (double a : weights_.weights) {
        acc += a * qk;
        qk *= q;
    }
    return acc;
}

double KernelSpace::section_norm_sq(Complex w) const {
    const double q = std::norm(w);
    double acc = 0.0, qk = 1.0;
    for (double a : weights_.weights) {
        acc += a * qk;
        qk *= q;
    }
    return acc;
}

Complex KernelSpace::coeff_inner(const Vec& f, const Vec& g) const {
    if (f.size() > truncation() || g.size() > truncation())
        throw DimensionError("coeff_inner: coefficient list exceeds truncation");
    Complex acc(0);
    const int n = static_cast<int>(std::min(f.size(), g.size()));
    for (int k = 0; k < n; ++k) acc += f(k) * std::conj(g(k)) / weights_.weights[k];
    return acc;
}

Vec KernelSpace::to_orthonormal(const Vec& monomial) const {
    if (monomial.size() > truncation())
        throw DimensionError("to_orthonormal: coefficient list exceeds truncation");
    Vec r = Vec::Zero(truncation());
    for (int k = 0; k < monomial.size(); ++k) r(k) = monomial(k) / std::sqrt(weights_.weights[k]);
    return r;
}

Vec KernelSpace::to_monomial(const Vec& orthonormal) const {
    if (orthonormal.size() != truncation())
        throw DimensionError("to_monomial: dimension mismatch");
    Vec r(truncation());
    for (int k = 0; k < r.size(); ++k) r(k) = orthonormal(k) * std::sqrt(weights_.weights[k]);
    return r;
}

bool KernelSpace::same_weights(const KernelSpace& other, double rel_tol) const {
    if (truncation() != other.truncation()) return false;
    for (int k = 0; k < truncation(); ++k) {
        double a = weight(k), b = other.weight(k);
        if (std::abs(a - b) > rel_tol * std::max(a, b)) return false;
    }
    return true;
}

}  // namespace flagbundle
