#include "flagbundle/bundle_geom.hpp"

#include "flagbundle/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <memory>

namespace flagbundle {

Vec eigen_section(const KernelSpace& space, Complex w) {
    const int n = space.truncation();
    Vec v(n);
    Complex wk(1);
    for (int k = 0; k < n; ++k) {
        v(k) = space.weight(k) * wk;
        wk *= w;
    }
    return v;
}

FrameEvaluator::FrameEvaluator(const FlagOperator& T) : flag_(&T) {
    const int last = T.block_count() - 1;
    kernel_backed_ = T.space(last).has_value();
    if (!kernel_backed_) {
        const Mat& B = T.diagonal(last);
        auto [right, left] = null_anchors(B);
        const int n = static_cast<int>(B.rows());
        bordered_base_ = Mat::Zero(n + 1, n + 1);
        bordered_base_.topLeftCorner(n, n) = B;
        bordered_base_.col(n).head(n) = left;
        bordered_base_.row(n).head(n) = right.adjoint();
    }
}

Vec FrameEvaluator::last_block_section(Complex w) const {
    const int last = flag_->block_count() - 1;
    if (kernel_backed_) {
        const KernelSpace& sp = *flag_->space(last);
        return sp.to_orthonormal(eigen_section(sp, w));
    }
    const int n = flag_->block_dim();
    Mat M = bordered_base_;
    M.topLeftCorner(n, n).diagonal().array() -= w;
    Vec rhs = Vec::Zero(n + 1);
    rhs(n) = 1.0;
    Vec sol = M.partialPivLu().solve(rhs);
    return sol.head(n);
}

FrameEvaluation FrameEvaluator::frame(Complex w) const {
    const int n = flag_->block_count();
    FrameEvaluation fe;
    fe.w = w;
    fe.sections.resize(n);
    fe.norms.resize(n);
    fe.residuals.resize(n);
    fe.sections[n - 1] = last_block_section(w);
    for (int i = n - 2; i >= 0; --i) fe.sections[i] = flag_->coupling(i) * fe.sections[i + 1];
    for (int i = 0; i < n; ++i) {
        fe.norms[i] = fe.sections[i].norm();
        fe.residuals[i] = (flag_->diagonal(i) * fe.sections[i] - w * fe.sections[i]).norm();
    }
    for (int i = n - 2; i >= 0; --i) {
        double upstream = flag_->coupling(i).norm() * fe.norms[i + 1];
        if (!(fe.norms[i] > 1e-12 * std::max(upstream, 1e-300)))
            throw DegenerateFrame("flag_frame: coupling symbol vanishes at w (level " +
                                  std::to_string(i) + ")");
    }
    return fe;
}

NormProvider FrameEvaluator::norm_sq_provider(int block) const {
    const FrameEvaluator self = *this;
    return [self, block](Complex w) {
        FrameEvaluation fe = self.frame(w);
        return fe.norms[block] * fe.norms[block];
    };
}

NormProvider FrameEvaluator::last_block_norm_sq() const {
    const int last = flag_->block_count() - 1;
    if (kernel_backed_) {
        const KernelSpace sp = *flag_->space(last);
        return [sp](Complex w) { return sp.section_norm_sq(w); };
    }
    const FrameEvaluator self = *this;
    return [self](Complex w) { return self.last_block_section(w).squaredNorm(); };
}

FrameEvaluation flag_frame(const FlagOperator& T, Complex w) { return FrameEvaluator(T).frame(w); }

namespace {

double log_norm(const NormProvider& f, Complex w) {
    double v = f(w);
    if (!(v > 0.0)) throw DegenerateFrame("curvature: non-positive norm at stencil point");
    return std::log(v);
}

}  // namespace

double curvature(const NormProvider& norm_sq, Complex w, double h) {
    if (!(std::abs(w) + 2 * h < 1.0)) throw DomainError("curvature: stencil leaves the disc");
    const Complex ih(0, h);
    double lap = (log_norm(norm_sq, w + h) + log_norm(norm_sq, w - h) + log_norm(norm_sq, w + ih) +
                  log_norm(norm_sq, w - ih) - 4.0 * log_norm(norm_sq, w)) /
                 (h * h);
    return -0.25 * lap;
}

Complex curvature_derivatives(const NormProvider& norm_sq, Complex w, int i, int j, double h) {
    if (i < 0 || j < 0 || i + j > 2)
        throw DomainError("curvature_derivatives: need i, j >= 0 and i + j <= 2");
    if (!(std::abs(w) + (2 + i + j) * h < 1.0))
        throw DomainError("curvature_derivatives: stencil leaves the disc");

    // lattice of log-norm values g[dx+2][dy+2] on w + h(dx + i dy)
    double g[5][5];
    for (int dx = -2; dx <= 2; ++dx)
        for (int dy = -2; dy <= 2; ++dy)
            g[dx + 2][dy + 2] = log_norm(norm_sq, w + Complex(dx * h, dy * h));
    auto G = [&](int dx, int dy) { return g[dx + 2][dy + 2]; };

    const double h2 = h * h, h3 = h2 * h, h4 = h2 * h2;
    const int p = i + 1, q = j + 1;

    if (p == 1 && q == 1) {
        double lap = (G(1, 0) + G(-1, 0) + G(0, 1) + G(0, -1) - 4.0 * G(0, 0)) / h2;
        return Complex(-0.25 * lap, 0.0);
    }
    if ((p == 2 && q == 1) || (p == 1 && q == 2)) {
        double d3x = (G(2, 0) - 2 * G(1, 0) + 2 * G(-1, 0) - G(-2, 0)) / (2 * h3);
        double d3y = (G(0, 2) - 2 * G(0, 1) + 2 * G(0, -1) - G(0, -2)) / (2 * h3);
        double dxdyy =
            (G(1, 1) - 2 * G(1, 0) + G(1, -1) - G(-1, 1) + 2 * G(-1, 0) - G(-1, -1)) / (2 * h3);
        double dxxdy =
            (G(1, 1) - 2 * G(0, 1) + G(-1, 1) - G(1, -1) + 2 * G(0, -1) - G(-1, -1)) / (2 * h3);
        Complex dd_dbar = Complex(d3x + dxdyy, -(dxxdy + d3y)) / 8.0;  // d^2 dbar
        return (p == 2) ? -dd_dbar : -std::conj(dd_dbar);
    }
    if (p == 2 && q == 2) {
        double bilap = (20 * G(0, 0) - 8 * (G(1, 0) + G(-1, 0) + G(0, 1) + G(0, -1)) +
                        2 * (G(1, 1) + G(1, -1) + G(-1, 1) + G(-1, -1)) + G(2, 0) + G(-2, 0) +
                        G(0, 2) + G(0, -2)) /
                       h4;
        return Complex(-bilap / 16.0, 0.0);
    }
    // (p,q) = (3,1) or (1,3)
    double d4x = (G(2, 0) - 4 * G(1, 0) + 6 * G(0, 0) - 4 * G(-1, 0) + G(-2, 0)) / h4;
    double d4y = (G(0, 2) - 4 * G(0, 1) + 6 * G(0, 0) - 4 * G(0, -1) + G(0, -2)) / h4;
    double d3xdy = (G(2, 1) - 2 * G(1, 1) + 2 * G(-1, 1) - G(-2, 1) - G(2, -1) + 2 * G(1, -1) -
                    2 * G(-1, -1) + G(-2, -1)) /
                   (4 * h4);
    double dxd3y = (G(1, 2) - 2 * G(1, 1) + 2 * G(1, -1) - G(1, -2) - G(-1, 2) + 2 * G(-1, 1) -
                    2 * G(-1, -1) + G(-1, -2)) /
                   (4 * h4);
    Complex d3_dbar = Complex(d4x - d4y, -2.0 * (d3xdy + dxd3y)) / 16.0;
    return (p == 3) ? -d3_dbar : -std::conj(d3_dbar);
}

Mat gram_matrix(const FrameEvaluation& frame) {
    const int n = static_cast<int>(frame.sections.size());
    const int dim = static_cast<int>(frame.sections.front().size());
    std::vector<Vec> embedded(n);
    for (int i = 0; i < n; ++i) {
        embedded[i] = Vec::Zero(n * dim);
        embedded[i].segment(i * dim, dim) = frame.sections[i];
    }
    Mat G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) G(i, j) = embedded[i].dot(embedded[j]);
    Eigen::SelfAdjointEigenSolver<Mat> es(G, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 1e-12 * std::max(es.eigenvalues().maxCoeff(), 1e-300)))
        throw DegenerateFrame("gram_matrix: frame is numerically degenerate");
    return G;
}

double coupling_ratio(const FlagOperator& T, int level, Complex w) {
    if (level < 0 || level + 1 >= T.block_count())
        throw DimensionError("coupling_ratio: level out of range");
    FrameEvaluation fe = FrameEvaluator(T).frame(w);
    double denom = fe.norms[level + 1] * fe.norms[level + 1];
    return fe.norms[level] * fe.norms[level] / denom;
}

double second_fundamental_form(const FlagOperator& T, int level, Complex w, double h) {
    if (level < 0 || level + 1 >= T.block_count())
        throw DimensionError("second_fundamental_form: level out of range");
    FrameEvaluator ev(T);
    double K = curvature(ev.norm_sq_provider(level), w, h);
    FrameEvaluation fe = ev.frame(w);
    double inv_ratio = (fe.norms[level + 1] * fe.norms[level + 1]) /
                       (fe.norms[level] * fe.norms[level]);
    double den = inv_ratio - K;
    if (!(den > 0.0)) throw DegenerateFrame("second_fundamental_form: degenerate denominator");
    return K / std::sqrt(den);
}

namespace {

Vec derivative4(const SectionProvider& f, Complex w, double h) {
    return (-f(w + 2 * h) + 8.0 * f(w + h) - 8.0 * f(w - h) + f(w - 2 * h)) / (12.0 * h);
}

}  // namespace

double sff_gram_schmidt(const SectionProvider& gamma1, const SectionProvider& gamma2, Complex w,
                        double h) {
    Vec g1 = gamma1(w);
    Vec g2 = gamma2(w);
    Vec t = derivative4(gamma1, w, h) - g2;
    double scale = std::max(t.norm() * g1.norm(), 1e-300);
    if (std::abs(g1.dot(t)) > 1e-8 * scale)
        throw InvalidFrame("sff_gram_schmidt: gamma_1 not orthogonal to d gamma_1 - gamma_2");

    double hval = g1.squaredNorm();
    auto gfun = [&](Complex x) {
        Vec a = gamma1(x), b = gamma2(x);
        return a.dot(b) / a.squaredNorm();  // h^{-1} <gamma_2, gamma_1>
    };
    const Complex ih(0, h);
    Complex gx = (gfun(w + h) - gfun(w - h)) / (2 * h);
    Complex gy = (gfun(w + ih) - gfun(w - ih)) / (2 * h);
    Complex dbar = 0.5 * (gx + Complex(0, 1) * gy);

    double den_sq = g2.squaredNorm() - std::norm(g1.dot(g2)) / hval;
    if (!(den_sq > 0.0)) throw InvalidFrame("sff_gram_schmidt: degenerate frame");
    Complex theta = -std::sqrt(hval) * dbar / std::sqrt(den_sq);
    return theta.real();
}

std::pair<SectionProvider, SectionProvider> normalized_frame_pair(const FlagOperator& T, int level,
                                                                  double h) {
    if (level < 0 || level + 1 >= T.block_count())
        throw DimensionError("normalized_frame_pair: level out of range");
    auto ev = std::make_shared<FrameEvaluator>(T);
    const int n = T.block_count();
    const int dim = T.block_dim();
    auto embed = [n, dim](int blk, const Vec& v) {
        Vec r = Vec::Zero(n * dim);
        r.segment(blk * dim, dim) = v;
        return r;
    };
    SectionProvider gamma1 = [ev, embed, level](Complex w) {
        return embed(level, ev->frame(w).sections[level]);
    };
    SectionProvider gamma2 = [ev, embed, gamma1, level, h](Complex w) {
        Vec d = derivative4(gamma1, w, h);
        return Vec(d - embed(level + 1, ev->frame(w).sections[level + 1]));
    };
    return {gamma1, gamma2};
}

}  // namespace flagbundle
