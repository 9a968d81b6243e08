#pragma once

#include "flagbundle/flag.hpp"

namespace flagbundle {

/// Unipotent intertwiner X = I + K between a condition-(A) flag operator and
/// its bidiagonal truncation: X T = T~ X, with K strictly upper block
/// triangular and X^{-1} the finite Neumann sum.
struct UnipotentWitness {
    int block_count = 0;
    int block_dim = 0;
    Mat K;
    Mat X;
    Mat X_inv;
    double residual = 0.0;  // ||X T - T~ X|| / (||T~|| max(1, ||X||)), corner-compressed
    std::map<std::pair<int, int>, double> level_residuals;  // K_{i,j} T_{j,j} vs T_{i,i} K_{i,j}
    std::map<std::pair<int, int>, Poly> gamma;              // accumulated commutant symbols
};

/// Closed-form K for three blocks: K_{0,1} = T_{0,1} + phi_{0,2}(T_{0,0}) T_{0,1},
/// K_{0,2} = T_{0,2}, K_{1,2} = T_{1,2}.
UnipotentWitness build_K_n3(const FlagOperator& Ttilde, double check_tol = 1e-8);

/// Inductive construction for n >= 3: recurse on the trailing blocks, fix the
/// last column K_{i,n-1} = T_{i,n-1}, and back-solve the first row, accumulating
/// the commutant factors gamma_{i,j} symbolically before matrix evaluation.
/// symbol_base, when given, supplies per-block matrices the symbols are
/// evaluated at instead of the diagonal blocks (they must commute with the
/// diagonals and be pulled through the couplings). Throws ConstructionFailed
/// when a back-substituted K block fails its intertwining equation.
UnipotentWitness build_intertwiner(const FlagOperator& Ttilde,
                                   const std::vector<Mat>* symbol_base = nullptr,
                                   double check_tol = 1e-8);

/// Lemma 3.7: splits a condition-(A) operator into its bidiagonal truncation
/// plus the witness intertwining the two.
std::pair<FlagOperator, UnipotentWitness> reduce_to_ofb(const FlagOperator& Ttilde);

/// Finite Neumann sum sum_j (-K)^j for X = I + K with strictly-upper block K.
/// Rejects inputs whose lower/diagonal block pattern is non-nilpotent.
Mat invert_unipotent(const Mat& X, int block_count, int block_dim);

struct ComposedWitness {
    Mat X;
    double residual;
};

/// From X: A -> B, Y: A -> A1, Z: B -> B1 (each W satisfying W lhs = rhs W),
/// returns Z X Y^{-1}: A1 -> B1, verified against the target pair.
ComposedWitness compose_witnesses(const Mat& X, const Mat& Y, const Mat& Z, const Mat& A1,
                                  const Mat& B1, int corner_budget = 0, double tol = 1e-8);

}  // namespace flagbundle
