#pragma once

#include "flagbundle/bundle_geom.hpp"
#include "flagbundle/intertwine.hpp"

#include <limits>

namespace flagbundle {

/// Grid evaluation of the unitary-invariant families of a flag operator:
/// last-block curvature, per-block frame norms, per-level coupling ratios and
/// second fundamental forms, and the normalized higher inner products
/// <T_{i,j} t_j, t_i> / ||t_i||^2. Degenerate grid points are flagged invalid.
struct InvariantReport {
    std::vector<PolarGrid::Point> points;
    std::vector<bool> valid;
    std::vector<double> curvature_last;                    // per point
    std::vector<std::vector<double>> frame_norms;          // [block][point]
    std::vector<std::vector<double>> coupling_ratios;      // [level][point]
    std::vector<std::vector<double>> second_fundamental;   // [level][point]
    std::map<std::pair<int, int>, std::vector<Complex>> higher_products;
    double stencil_h = 1.5e-4;

    double valid_fraction() const;
};

InvariantReport invariant_report(const FlagOperator& T, const PolarGrid& grid, double h = 1.5e-4);

enum class EquivVerdict { Equivalent, NotEquivalent, Inconclusive };

struct EquivEvidence {
    EquivVerdict verdict = EquivVerdict::Inconclusive;
    double max_curvature_dev = 0.0;
    double max_ratio_dev = 0.0;   // deviation of r_i(w) = ||t_i||/||t~_i|| across levels
    double max_theta_dev = 0.0;
    double max_higher_dev = 0.0;
    double valid_fraction = 1.0;
    std::string detail;
};

/// Theorem-3.1 test for strongly-flag (bidiagonal) operators: last-block
/// curvatures agree and r_i(w) = ||t_i(w)||/||t~_i(w)|| is independent of i.
EquivEvidence unitary_equiv_ofb(const FlagOperator& A, const FlagOperator& B,
                                const PolarGrid& grid, double curv_tol = 1e-4,
                                double ratio_tol = 1e-6, double h = 1.5e-4);

/// Full invariant set: last-block curvature, second fundamental forms, and
/// normalized higher inner products.
EquivEvidence full_invariant_equiv(const FlagOperator& A, const FlagOperator& B,
                                   const PolarGrid& grid, double curv_tol = 1e-4,
                                   double ratio_tol = 1e-6, double h = 1.5e-4);

struct PropertyHEstimate {
    std::vector<double> samples;  // s_k = k sqrt(a_{1,k}/a_{2,k}), k = 1..window-1
    enum class V { Diverges, Fails, Inconclusive } verdict = V::Inconclusive;
};

/// Lemma-5.3 growth criterion for Property (H).
PropertyHEstimate property_h_estimate(const KernelSpace& s1, const KernelSpace& s2, int window);

struct SimilarityOptions {
    std::vector<double> radii;                // default: 20 samples up to 0.95
    double bound = 50.0;                      // sup|psi0| bound for "similar"
    double divergence_threshold = 2.0;        // |psi0(r_max)| needed for "not-similar"
    double subharmonic_tol = 1e-3;            // Laplacian slack
    double stencil_h = 1e-3;
    std::vector<int> orders;                  // hypothesis-(1) orders m_i; default 1
    std::vector<Poly> phi;                    // hypothesis-(2) matchers; default 1
    double hyp2_tol = 1e-6;
    int max_order = 8;
    double witness_tol = 1e-4;
};

struct SimilarityVerdict {
    enum class V { Similar, NotSimilar, Inconclusive } verdict = V::Inconclusive;
    bool witnessed = false;
    std::vector<double> radii;
    std::vector<double> psi0;
    double sup_abs_psi0 = 0.0;
    double min_laplacian = 0.0;
    double witness_residual = std::numeric_limits<double>::quiet_NaN();
    std::string precondition_report;  // nonempty: hypotheses failed, no verdict issued
};

/// Theorem-4.8 heuristic: psi0(w) = log(||t_n^A||^2 / ||t_n^B||^2) sampled along
/// radii; "similar" needs a bounded, sampled-subharmonic profile, "not-similar"
/// a monotone divergent one. B's diagonal blocks must be power kernels.
SimilarityVerdict similarity_test(const FlagOperator& A, const FlagOperator& B,
                                  const SimilarityOptions& opt = {});

struct SimilarityWitness {
    Mat X;  // X A = B X
    double residual = std::numeric_limits<double>::quiet_NaN();
    double condition_estimate = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
    std::string note;
};

/// Block-diagonal witness between the bidiagonal reductions, composed with the
/// Lemma-3.6 witnesses of both sides. Requires kernel-backed diagonals.
SimilarityWitness similarity_witness(const FlagOperator& A, const FlagOperator& B,
                                   const std::vector<Poly>& phi = {}, double residual_tol = 1e-4);

}  // namespace flagbundle
