#pragma once

#include "flagbundle/types.hpp"

namespace flagbundle {

/// Spectral norm via the largest eigenvalue of A^* A.
double operator_norm(const Mat& A);

/// Leading principal corner with d rows/columns dropped (clamped to 1x1).
Mat corner(const Mat& A, int d);

/// ||corner(L - R, d)|| / scale, the residual metric used for operator equations.
double corner_residual(const Mat& L, const Mat& R, int d, double scale);

/// Drops the trailing d rows/columns of every block of an nb x nb block matrix
/// (the truncation edge lives at the end of each block, not of the assembly).
Mat block_corner(const Mat& A, int nb, int dim, int d);

double block_corner_residual(const Mat& L, const Mat& R, int nb, int dim, int d, double scale);

/// Hermitian square root; throws NotHypercontraction if an eigenvalue
/// drops below -psd_tol. Small negatives are clamped to zero.
Mat hermitian_sqrt(const Mat& S, double psd_tol, double* min_eigenvalue = nullptr);

/// Smallest-singular-pair anchors (right, left) of A, used to border
/// a nearly singular shifted block.
std::pair<Vec, Vec> null_anchors(const Mat& A);

}  // namespace flagbundle
