#include "flagbundle/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace flagbundle {

double operator_norm(const Mat& A) {
    if (A.rows() == 0 || A.cols() == 0) return 0.0;
    Mat G = A.adjoint() * A;
    Eigen::SelfAdjointEigenSolver<Mat> es(G, Eigen::EigenvaluesOnly);
    double top = es.eigenvalues().maxCoeff();
    return std::sqrt(std::max(top, 0.0));
}

Mat corner(const Mat& A, int d) {
    const int r = std::max<int>(1, static_cast<int>(A.rows()) - d);
    const int c = std::max<int>(1, static_cast<int>(A.cols()) - d);
    return A.topLeftCorner(r, c);
}

double corner_residual(const Mat& L, const Mat& R, int d, double scale) {
    Mat diff = corner(L, d) - corner(R, d);
    return operator_norm(diff) / (scale > 0 ? scale : 1.0);
}

Mat block_corner(const Mat& A, int nb, int dim, int d) {
    const int keep = std::max(1, dim - d);
    Mat out(nb * keep, nb * keep);
    for (int bi = 0; bi < nb; ++bi)
        for (int bj = 0; bj < nb; ++bj)
            out.block(bi * keep, bj * keep, keep, keep) =
                A.block(bi * dim, bj * dim, keep, keep);
    return out;
}

double block_corner_residual(const Mat& L, const Mat& R, int nb, int dim, int d, double scale) {
    Mat diff = block_corner(L, nb, dim, d) - block_corner(R, nb, dim, d);
    return operator_norm(diff) / (scale > 0 ? scale : 1.0);
}

Mat hermitian_sqrt(const Mat& S, double psd_tol, double* min_eigenvalue) {
    Mat H = 0.5 * (S + S.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    const auto& ev = es.eigenvalues();
    double lo = ev.minCoeff();
    if (min_eigenvalue) *min_eigenvalue = lo;
    if (lo < -psd_tol)
        throw NotHypercontraction("hermitian_sqrt: matrix is not positive semidefinite", lo);
    Eigen::VectorXd clipped = ev.cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
}

std::pair<Vec, Vec> null_anchors(const Mat& A) {
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const int last = static_cast<int>(svd.singularValues().size()) - 1;
    Vec right = svd.matrixV().col(last);
    Vec left = svd.matrixU().col(last);
    return {right, left};
}

}  // namespace flagbundle
