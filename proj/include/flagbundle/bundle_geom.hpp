#pragma once

#include "flagbundle/flag.hpp"
#include "flagbundle/grid.hpp"

#include <functional>

namespace flagbundle {

/// w -> ||t(w)||^2 for some holomorphic section family t.
using NormProvider = std::function<double(Complex)>;
/// w -> section vector (ambient coordinates).
using SectionProvider = std::function<Vec(Complex)>;

/// Monomial coefficients of K(., conj(w)) = sum_k a_k w^k z^k, the
/// quasi-eigenvector of the backward shift at w.
Vec eigen_section(const KernelSpace& space, Complex w);

/// Eigenvector chain t_n(w), t_i(w) = T_{i,i+1} t_{i+1}(w) at a point.
/// Sections are stored in per-block orthonormal (ambient) coordinates.
struct FrameEvaluation {
    Complex w;
    std::vector<Vec> sections;
    std::vector<double> norms;      // ||t_i(w)||
    std::vector<double> residuals;  // ||(T_{i,i} - w) t_i(w)||
};

/// Evaluates frames of a flag operator. Kernel-backed blocks use the exact
/// eigen-section; explicit blocks fall back to a bordered solve anchored at
/// the block's numerical null pair, which keeps the section holomorphic in w.
class FrameEvaluator {
  public:
    explicit FrameEvaluator(const FlagOperator& T);

    FrameEvaluation frame(Complex w) const;

    /// ||t_i(w)||^2 as a function of w (re-evaluates the chain per call).
    NormProvider norm_sq_provider(int block) const;

    /// Fast path for the last block (closed kernel sum when kernel-backed).
    NormProvider last_block_norm_sq() const;

    /// Last-block section in ambient coordinates.
    Vec last_block_section(Complex w) const;

  private:
    const FlagOperator* flag_;
    bool kernel_backed_;
    Mat bordered_base_;  // [[B, d],[c^*, 0]] with the -w shift patched in per call
};

/// One-shot frame evaluation at a point.
FrameEvaluation flag_frame(const FlagOperator& T, Complex w);

/// -(1/4) * (5-point Laplacian of log ||t||^2 with step h); O(h^2) error.
double curvature(const NormProvider& norm_sq, Complex w, double h = 1.5e-4);

/// K_{w^i, conj(w)^j} = -d^{i+1} dbar^{j+1} log ||t(w)||^2 for i + j <= 2,
/// via direct Wirtinger stencils on the log-norm lattice.
Complex curvature_derivatives(const NormProvider& norm_sq, Complex w, int i, int j,
                              double h = 1.5e-4);

/// Gram matrix of the frame in the ambient direct-sum metric.
Mat gram_matrix(const FrameEvaluation& frame);

/// ||T_{i,i+1} t_{i+1}(w)||^2 / ||t_{i+1}(w)||^2 (0-based level i).
double coupling_ratio(const FlagOperator& T, int level, Complex w);

/// Scalar dbar-coefficient of the second fundamental form of E_{T_{i,i}} in E_T:
/// K / sqrt(||t_{i+1}||^2 / ||t_i||^2 - K) with K the curvature of level i.
double second_fundamental_form(const FlagOperator& T, int level, Complex w, double h = 1.5e-4);

/// Same quantity from the Gram-Schmidt side: given the normalized frame
/// (gamma_1 orthogonal to d gamma_1 - gamma_2), evaluates
/// -h^{1/2} dbar(h^{-1} <gamma_2, gamma_1>) / (||gamma_2||^2 - |<gamma_2,gamma_1>|^2/h)^{1/2}.
double sff_gram_schmidt(const SectionProvider& gamma1, const SectionProvider& gamma2, Complex w,
                        double h = 1.5e-4);

/// Builds the paper-normalized frame pair for one level of a flag operator:
/// gamma_1 = embedded t_i, gamma_2 = d gamma_1 - embedded t_{i+1}.
std::pair<SectionProvider, SectionProvider> normalized_frame_pair(const FlagOperator& T, int level,
                                                                  double h = 1.5e-4);

}  // namespace flagbundle
