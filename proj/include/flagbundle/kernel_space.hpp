#pragma once

#include "flagbundle/types.hpp"

namespace flagbundle {

enum class WeightTag { Power, Explicit };

/// Positive coefficient sequence a_0..a_{N-1} of a diagonal kernel
/// K(z,w) = sum_k a_k z^k conj(w)^k truncated to N monomials.
struct WeightSequence {
    std::vector<double> weights;
    WeightTag tag = WeightTag::Explicit;
    double lambda = 0.0;  // meaningful for tag == Power

    static WeightSequence power(double lambda, int n);
    static WeightSequence explicit_weights(std::vector<double> w);
};

/// a_k = Gamma(lambda+k) / (Gamma(lambda) k!), computed by the stable recurrence
/// a_{k+1} = a_k (lambda+k)/(k+1). Integer lambda gives binomial C(lambda+k-1, k).
WeightSequence power_weights(double lambda, int n);

class KernelSpace {
  public:
    explicit KernelSpace(WeightSequence w);

    int truncation() const { return static_cast<int>(weights_.weights.size()); }
    double weight(int k) const { return weights_.weights[k]; }
    const WeightSequence& weights() const { return weights_; }
    bool is_power() const { return weights_.tag == WeightTag::Power; }
    double lambda() const { return weights_.lambda; }

    /// sum_{k<N} a_k z^k conj(w)^k
    Complex kernel_eval(Complex z, Complex w) const;

    /// ||K(.,conj(w))||^2 = sum_{k<N} a_k |w|^{2k}
    double section_norm_sq(Complex w) const;

    /// <f,g> = sum f_k conj(g_k)/a_k for monomial-coordinate coefficient lists.
    Complex coeff_inner(const Vec& f, const Vec& g) const;

    /// Monomial coefficients -> coordinates in the orthonormal basis e_k = sqrt(a_k) z^k.
    Vec to_orthonormal(const Vec& monomial) const;
    Vec to_monomial(const Vec& orthonormal) const;

    bool same_weights(const KernelSpace& other, double rel_tol = 0.0) const;

  private:
    WeightSequence weights_;
};

}  // namespace flagbundle
