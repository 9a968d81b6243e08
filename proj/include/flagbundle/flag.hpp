#pragma once

#include "flagbundle/op_model.hpp"

#include <map>
#include <optional>

namespace flagbundle {

/// Condition (A) data: for each pair (i,j), j-i >= 2, the polynomial phi_{i,j}
/// so that T_{i,j} = phi_{i,j}(T_{i,i}) T_{i,i+1} ... T_{j-1,j}. Indices are 0-based.
using ConditionAData = std::map<std::pair<int, int>, Poly>;

/// Block upper-triangular operator: diagonal blocks are adjoint multiplication
/// operators (weighted backward shifts or explicit matrices), superdiagonal
/// couplings intertwine adjacent diagonals, higher entries come from Condition (A).
class FlagOperator {
  public:
    FlagOperator(std::vector<std::optional<KernelSpace>> spaces, std::vector<Mat> diagonals,
                 std::vector<Mat> couplings, std::vector<std::optional<Poly>> coupling_symbols,
                 ConditionAData condA, Mat assembled);

    int block_count() const { return static_cast<int>(diag_.size()); }
    int block_dim() const { return static_cast<int>(diag_.front().rows()); }
    int offset(int i) const { return i * block_dim(); }
    int total_dim() const { return block_count() * block_dim(); }

    const std::optional<KernelSpace>& space(int i) const { return spaces_[i]; }
    const Mat& diagonal(int i) const { return diag_[i]; }
    const Mat& coupling(int i) const { return coup_[i]; }  // T_{i,i+1}
    const std::optional<Poly>& coupling_symbol(int i) const { return coup_symbol_[i]; }
    const ConditionAData& conditionA() const { return condA_; }
    const Mat& assembled() const { return assembled_; }

    bool is_ofb() const { return condA_.empty(); }

    /// Same diagonals and couplings with the higher entries zeroed.
    FlagOperator ofb_truncation() const;

    /// Largest coupling-symbol degree (1 for explicit-matrix couplings).
    int symbol_degree_budget() const;

    /// T_{i,j} block of the assembled matrix.
    Mat block(int i, int j) const;

    /// Same structure with every block conjugated by block-diagonal unitaries:
    /// diagonals U_i T_{i,i} U_i^*, couplings U_i T_{i,i+1} U_{i+1}^*.
    /// Kernel-space provenance and coupling symbols no longer apply and are dropped;
    /// Condition (A) polynomials stay valid and are kept.
    FlagOperator conjugated(const std::vector<Mat>& unitaries) const;

  private:
    std::vector<std::optional<KernelSpace>> spaces_;
    std::vector<Mat> diag_;
    std::vector<Mat> coup_;
    std::vector<std::optional<Poly>> coup_symbol_;
    ConditionAData condA_;
    Mat assembled_;
};

struct CouplingSpec {
    std::optional<Poly> symbol;
    std::optional<Mat> matrix;  // orthonormal coordinates, used when symbol is absent

    static CouplingSpec poly(Poly p) { return {std::move(p), std::nullopt}; }
    static CouplingSpec explicit_matrix(Mat m) { return {std::nullopt, std::move(m)}; }
};

/// Builds the flag operator over the given spaces. Diagonal blocks are the
/// backward shifts of the spaces; couplings are adjoints of multiplier matrices
/// (M_psi: H_i -> H_{i+1}, coupling T_{i,i+1} = M_psi^*) or explicit matrices.
/// Throws FlagViolation for zero couplings or intertwining residuals beyond tol.
FlagOperator assemble_flag(const std::vector<KernelSpace>& spaces,
                           const std::vector<CouplingSpec>& couplings,
                           const ConditionAData& condA = {}, double intertwine_tol = 1e-10);

/// Same, from explicit diagonal/coupling matrices (used for conjugated operators).
FlagOperator assemble_flag_explicit(const std::vector<Mat>& diagonals,
                                    const std::vector<Mat>& couplings,
                                    const ConditionAData& condA = {},
                                    double intertwine_tol = 1e-10);

struct FlagCheckReport {
    std::vector<double> coupling_residuals;  // relative, corner-compressed
    std::vector<bool> coupling_nonzero;
    std::map<std::pair<int, int>, double> conditionA_residuals;
    std::map<std::pair<int, int>, double> commutant_residuals;

    bool ok(double tol = 1e-10) const;
};

FlagCheckReport verify_flag(const FlagOperator& T);

}  // namespace flagbundle
