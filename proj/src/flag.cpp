#include "flagbundle/flag.hpp"

#include "flagbundle/linalg.hpp"

#include <cmath>

namespace flagbundle {

FlagOperator::FlagOperator(std::vector<std::optional<KernelSpace>> spaces, std::vector<Mat> diagonals,
                           std::vector<Mat> couplings, std::vector<std::optional<Poly>> coupling_symbols,
                           ConditionAData condA, Mat assembled)
    : spaces_(std::move(spaces)),
      diag_(std::move(diagonals)),
      coup_(std::move(couplings)),
      coup_symbol_(std::move(coupling_symbols)),
      condA_(std::move(condA)),
      assembled_(std::move(assembled)) {}

int FlagOperator::symbol_degree_budget() const {
    int d = 1;
    for (const auto& s : coup_symbol_)
        if (s) d = std::max(d, poly_degree(*s));
    for (const auto& [key, phi] : condA_) d = std::max(d, poly_degree(phi));
    return d;
}

Mat FlagOperator::block(int i, int j) const {
    const int n = block_dim();
    return assembled_.block(offset(i), offset(j), n, n);
}

FlagOperator FlagOperator::ofb_truncation() const {
    const int n = block_count();
    const int dim = block_dim();
    Mat full = Mat::Zero(n * dim, n * dim);
    for (int i = 0; i < n; ++i) full.block(i * dim, i * dim, dim, dim) = diag_[i];
    for (int i = 0; i + 1 < n; ++i) full.block(i * dim, (i + 1) * dim, dim, dim) = coup_[i];
    return FlagOperator(spaces_, diag_, coup_, coup_symbol_, {}, std::move(full));
}

FlagOperator FlagOperator::conjugated(const std::vector<Mat>& unitaries) const {
    if (static_cast<int>(unitaries.size()) != block_count())
        throw DimensionError("conjugated: one unitary per block required");
    std::vector<Mat> d(block_count()), c(block_count() - 1);
    for (int i = 0; i < block_count(); ++i) d[i] = unitaries[i] * diag_[i] * unitaries[i].adjoint();
    for (int i = 0; i + 1 < block_count(); ++i)
        c[i] = unitaries[i] * coup_[i] * unitaries[i + 1].adjoint();
    return assemble_flag_explicit(d, c, condA_);
}

namespace {

int coupling_degree(const std::optional<Poly>& symbol) {
    return symbol ? std::max(1, poly_degree(*symbol)) : 1;
}

FlagOperator assemble(std::vector<std::optional<KernelSpace>> spaces, std::vector<Mat> diagonals,
                      std::vector<Mat> couplings, std::vector<std::optional<Poly>> symbols,
                      const ConditionAData& condA, double intertwine_tol) {
    const int n = static_cast<int>(diagonals.size());
    if (n < 1) throw DimensionError("assemble_flag: need at least one block");
    const int dim = static_cast<int>(diagonals.front().rows());
    for (const Mat& m : diagonals)
        if (m.rows() != dim || m.cols() != dim)
            throw DimensionError("assemble_flag: all blocks must share one truncation");
    if (static_cast<int>(couplings.size()) != n - 1)
        throw DimensionError("assemble_flag: expected n-1 couplings");

    for (int i = 0; i + 1 < n; ++i) {
        const Mat& c = couplings[i];
        if (c.rows() != dim || c.cols() != dim)
            throw DimensionError("assemble_flag: coupling dimension mismatch");
        double cn = operator_norm(c);
        if (!(cn > 0.0))
            throw FlagViolation("assemble_flag: coupling " + std::to_string(i) + " is zero", 0.0);
        // T_{i,i} T_{i,i+1} = T_{i,i+1} T_{i+1,i+1} on the compressed corner
        int budget = coupling_degree(symbols[i]) + 1;
        double scale = cn * std::max({1.0, operator_norm(diagonals[i]), operator_norm(diagonals[i + 1])});
        double res = corner_residual(diagonals[i] * c, c * diagonals[i + 1], budget, scale);
        if (res > intertwine_tol)
            throw FlagViolation("assemble_flag: coupling " + std::to_string(i) +
                                    " does not intertwine adjacent blocks",
                                res);
    }

    for (const auto& [key, phi] : condA) {
        auto [i, j] = key;
        if (i < 0 || j >= n || j - i < 2)
            throw DimensionError("assemble_flag: conditionA keys must satisfy j-i >= 2");
        if (poly_degree(phi) < 0)
            throw FlagViolation("assemble_flag: conditionA polynomial is zero", 0.0);
    }

    Mat full = Mat::Zero(n * dim, n * dim);
    for (int i = 0; i < n; ++i) full.block(i * dim, i * dim, dim, dim) = diagonals[i];
    for (int i = 0; i + 1 < n; ++i) full.block(i * dim, (i + 1) * dim, dim, dim) = couplings[i];
    for (int i = 0; i < n; ++i) {
        Mat chain;  // T_{i,i+1} ... T_{j-1,j}, extended as j grows
        for (int j = i + 2; j < n; ++j) {
            if (j == i + 2)
                chain = couplings[i] * couplings[i + 1];
            else
                chain = chain * couplings[j - 1];
            auto it = condA.find({i, j});
            if (it == condA.end()) continue;
            full.block(i * dim, j * dim, dim, dim) = poly_apply(it->second, diagonals[i]) * chain;
        }
    }

    return FlagOperator(std::move(spaces), std::move(diagonals), std::move(couplings),
                        std::move(symbols), condA, std::move(full));
}

}  // namespace

FlagOperator assemble_flag(const std::vector<KernelSpace>& spaces,
                           const std::vector<CouplingSpec>& couplings, const ConditionAData& condA,
                           double intertwine_tol) {
    const int n = static_cast<int>(spaces.size());
    if (static_cast<int>(couplings.size()) != n - 1)
        throw DimensionError("assemble_flag: expected n-1 couplings");
    std::vector<std::optional<KernelSpace>> sp(spaces.begin(), spaces.end());
    std::vector<Mat> diag(n), coup(n - 1);
    std::vector<std::optional<Poly>> symbols(n - 1);
    for (int i = 0; i < n; ++i) diag[i] = backward_shift(spaces[i]).entries;
    for (int i = 0; i + 1 < n; ++i) {
        if (couplings[i].symbol) {
            // T_{i,i+1} = M_psi^* with M_psi : H_i -> H_{i+1}
            coup[i] = multiplier(spaces[i], spaces[i + 1], *couplings[i].symbol).entries.adjoint();
            symbols[i] = couplings[i].symbol;
        } else if (couplings[i].matrix) {
            coup[i] = *couplings[i].matrix;
        } else {
            throw DimensionError("assemble_flag: coupling needs a symbol or a matrix");
        }
    }
    return assemble(std::move(sp), std::move(diag), std::move(coup), std::move(symbols), condA,
                    intertwine_tol);
}

FlagOperator assemble_flag_explicit(const std::vector<Mat>& diagonals,
                                    const std::vector<Mat>& couplings, const ConditionAData& condA,
                                    double intertwine_tol) {
    std::vector<std::optional<KernelSpace>> sp(diagonals.size());
    std::vector<std::optional<Poly>> symbols(couplings.size());
    return assemble(std::move(sp), diagonals, couplings, std::move(symbols), condA, intertwine_tol);
}

bool FlagCheckReport::ok(double tol) const {
    for (double r : coupling_residuals)
        if (!(r <= tol)) return false;
    for (bool nz : coupling_nonzero)
        if (!nz) return false;
    for (const auto& [k, r] : conditionA_residuals)
        if (!(r <= tol)) return false;
    for (const auto& [k, r] : commutant_residuals)
        if (!(r <= 1e-12)) return false;
    return true;
}

FlagCheckReport verify_flag(const FlagOperator& T) {
    FlagCheckReport rep;
    const int n = T.block_count();
    for (int i = 0; i + 1 < n; ++i) {
        const Mat& c = T.coupling(i);
        double cn = operator_norm(c);
        rep.coupling_nonzero.push_back(cn > 0.0);
        int budget = (T.coupling_symbol(i) ? std::max(1, poly_degree(*T.coupling_symbol(i))) : 1) + 1;
        double scale =
            std::max(cn, 1e-300) * std::max({1.0, operator_norm(T.diagonal(i)), operator_norm(T.diagonal(i + 1))});
        rep.coupling_residuals.push_back(
            corner_residual(T.diagonal(i) * c, c * T.diagonal(i + 1), budget, scale));
    }
    for (const auto& [key, phi] : T.conditionA()) {
        auto [i, j] = key;
        Mat chain = T.coupling(i);
        for (int l = i + 1; l < j; ++l) chain = chain * T.coupling(l);
        Mat phiTii = poly_apply(phi, T.diagonal(i));
        Mat expect = phiTii * chain;
        double scale = std::max(operator_norm(expect), 1e-300);
        int budget = poly_degree(phi) + (j - i) * T.symbol_degree_budget() + 1;
        rep.conditionA_residuals[key] =
            corner_residual(T.block(i, j), expect, budget, scale);
        // a polynomial in T_{i,i} commutes with T_{i,i} to machine precision
        double cscale = std::max(operator_norm(phiTii) * std::max(1.0, operator_norm(T.diagonal(i))), 1e-300);
        rep.commutant_residuals[key] =
            operator_norm(phiTii * T.diagonal(i) - T.diagonal(i) * phiTii) / cscale;
    }
    return rep;
}

}  // namespace flagbundle
