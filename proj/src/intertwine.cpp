#include "flagbundle/intertwine.hpp"

#include "flagbundle/linalg.hpp"

#include <Eigen/LU>
#include <cmath>

namespace flagbundle {

namespace {

// T_{i,i+1} ... T_{j-1,j} (empty product is not allowed; j > i)
Mat coupling_chain(const FlagOperator& T, int i, int j) {
    Mat chain = T.coupling(i);
    for (int l = i + 1; l < j; ++l) chain = chain * T.coupling(l);
    return chain;
}

// phi_{i,j} with the convention phi_{i,i+1} = 1; absent condition-(A) keys are 0.
Poly phi_of(const FlagOperator& T, int i, int j) {
    if (j == i + 1) return Poly{Complex(1)};
    auto it = T.conditionA().find({i, j});
    if (it == T.conditionA().end()) return Poly{};
    return it->second;
}

void finalize(UnipotentWitness& w, const FlagOperator& Ttilde, double check_tol) {
    const int n = Ttilde.block_count();
    const int dim = Ttilde.block_dim();
    w.block_count = n;
    w.block_dim = dim;
    w.X = Mat::Identity(n * dim, n * dim) + w.K;
    w.X_inv = invert_unipotent(w.X, n, dim);

    const int budget = (n + 2) * Ttilde.symbol_degree_budget() + n;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            Mat Kij = w.K.block(i * dim, j * dim, dim, dim);
            double kn = operator_norm(Kij);
            if (kn == 0.0) {
                w.level_residuals[{i, j}] = 0.0;
                continue;
            }
            double scale = kn * std::max({1.0, operator_norm(Ttilde.diagonal(i)),
                                          operator_norm(Ttilde.diagonal(j))});
            double res = corner_residual(Kij * Ttilde.diagonal(j), Ttilde.diagonal(i) * Kij,
                                         budget, scale);
            w.level_residuals[{i, j}] = res;
            if (res > check_tol)
                throw ConstructionFailed(
                    "intertwiner: K block (" + std::to_string(i) + "," + std::to_string(j) +
                        ") fails its intertwining equation",
                    i);
        }
    }

    Mat T_ofb = Ttilde.ofb_truncation().assembled();
    double scale = std::max(operator_norm(Ttilde.assembled()), 1e-300) *
                   std::max(1.0, operator_norm(w.X));
    w.residual = block_corner_residual(w.X * T_ofb, Ttilde.assembled() * w.X, n, dim,
                                       Ttilde.symbol_degree_budget() + 2, scale);
}

}  // namespace

UnipotentWitness build_K_n3(const FlagOperator& Ttilde, double check_tol) {
    if (Ttilde.block_count() != 3) throw DimensionError("build_K_n3: exactly 3 blocks required");
    FlagCheckReport rep = verify_flag(Ttilde);
    if (!rep.ok()) throw FlagViolation("build_K_n3: input fails flag verification", 0.0);
    const int dim = Ttilde.block_dim();
    UnipotentWitness w;
    w.K = Mat::Zero(3 * dim, 3 * dim);

    Poly phi02 = phi_of(Ttilde, 0, 2);
    Mat K01 = Ttilde.coupling(0);
    if (poly_degree(phi02) >= 0) K01 += poly_apply(phi02, Ttilde.diagonal(0)) * Ttilde.coupling(0);
    w.K.block(0, dim, dim, dim) = K01;
    w.K.block(0, 2 * dim, dim, dim) = Ttilde.block(0, 2);
    w.K.block(dim, 2 * dim, dim, dim) = Ttilde.coupling(1);
    w.gamma[{0, 1}] = poly_add(Poly{Complex(1)}, phi02);
    w.gamma[{1, 2}] = Poly{Complex(1)};
    w.gamma[{0, 2}] = phi02.empty() ? Poly{} : phi02;

    finalize(w, Ttilde, check_tol);
    return w;
}

UnipotentWitness build_intertwiner(const FlagOperator& Ttilde, const std::vector<Mat>* symbol_base,
                                   double check_tol) {
    const int n = Ttilde.block_count();
    if (n < 2) throw DimensionError("build_intertwiner: at least 2 blocks required");
    const int dim = Ttilde.block_dim();
    const int L = n - 1;

    // gamma_{i,j} for j < L by the trailing-block recursion; the last column is
    // K_{i,L} = T_{i,L} directly.
    std::map<std::pair<int, int>, Poly> gamma;
    for (int i = 0; i < L; ++i) gamma[{i, L}] = phi_of(Ttilde, i, L);
    for (int i = n - 2; i >= 0; --i) {
        for (int j = L - 1; j >= i + 1; --j) {
            Poly acc = phi_of(Ttilde, i, j + 1);
            for (int l = i + 1; l <= j; ++l) {
                Poly term = poly_mul(phi_of(Ttilde, i, l), gamma[{l, j + 1}]);
                acc = poly_add(acc, term);
            }
            gamma[{i, j}] = acc;
        }
    }

    UnipotentWitness w;
    w.gamma = gamma;
    w.K = Mat::Zero(n * dim, n * dim);
    for (int i = 0; i < L; ++i) w.K.block(i * dim, L * dim, dim, dim) = Ttilde.block(i, L);
    for (int i = 0; i < L; ++i) {
        const Mat& base = symbol_base ? (*symbol_base)[i] : Ttilde.diagonal(i);
        for (int j = i + 1; j < L; ++j) {
            const Poly& g = gamma[{i, j}];
            if (poly_degree(g) < 0) continue;
            w.K.block(i * dim, j * dim, dim, dim) = poly_apply(g, base) * coupling_chain(Ttilde, i, j);
        }
    }

    finalize(w, Ttilde, check_tol);
    return w;
}

std::pair<FlagOperator, UnipotentWitness> reduce_to_ofb(const FlagOperator& Ttilde) {
    UnipotentWitness w = build_intertwiner(Ttilde);
    return {Ttilde.ofb_truncation(), std::move(w)};
}

Mat invert_unipotent(const Mat& X, int block_count, int block_dim) {
    const int total = block_count * block_dim;
    if (X.rows() != total || X.cols() != total)
        throw DimensionError("invert_unipotent: dimension does not match the block pattern");
    Mat K = X - Mat::Identity(total, total);
    for (int i = 0; i < block_count; ++i)
        for (int j = 0; j <= i; ++j)
            if (K.block(i * block_dim, j * block_dim, block_dim, block_dim).norm() != 0.0)
                throw DomainError("invert_unipotent: non-nilpotent block pattern");
    Mat acc = Mat::Identity(total, total);
    Mat power = Mat::Identity(total, total);
    for (int j = 1; j < block_count; ++j) {
        power = power * (-K);
        acc += power;
    }
    return acc;
}

ComposedWitness compose_witnesses(const Mat& X, const Mat& Y, const Mat& Z, const Mat& A1,
                                  const Mat& B1, int corner_budget, double tol) {
    // W = Z X Y^{-1}, via W Y = Z X solved from the right
    Mat ZX = Z * X;
    Mat W = Y.transpose().partialPivLu().solve(ZX.transpose()).transpose();
    double scale = std::max(operator_norm(A1), 1e-300) * std::max(1.0, operator_norm(W));
    double res = corner_residual(W * A1, B1 * W, corner_budget, scale);
    if (res > tol)
        throw ConstructionFailed("compose_witnesses: composed witness fails the target pair", -1);
    return {std::move(W), res};
}

}  // namespace flagbundle
