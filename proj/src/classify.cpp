#include "flagbundle/classify.hpp"

#include "flagbundle/linalg.hpp"
#include "flagbundle/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace flagbundle {

double InvariantReport::valid_fraction() const {
    if (valid.empty()) return 0.0;
    std::size_t ok = 0;
    for (bool v : valid) ok += v ? 1 : 0;
    return double(ok) / double(valid.size());
}

InvariantReport invariant_report(const FlagOperator& T, const PolarGrid& grid, double h) {
    const int n = T.block_count();
    InvariantReport rep;
    rep.stencil_h = h;
    rep.points = grid.entries();
    const std::size_t m = rep.points.size();
    rep.valid.assign(m, true);
    rep.curvature_last.assign(m, 0.0);
    rep.frame_norms.assign(n, std::vector<double>(m, 0.0));
    rep.coupling_ratios.assign(std::max(0, n - 1), std::vector<double>(m, 0.0));
    rep.second_fundamental.assign(std::max(0, n - 1), std::vector<double>(m, 0.0));
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 2; j < n; ++j) pairs.push_back({i, j});
    for (auto& p : pairs) rep.higher_products[p].assign(m, Complex(0));

    FrameEvaluator ev(T);
    parallel_for(m, [&](std::size_t pt) {
        const Complex w = rep.points[pt].w;
        try {
            FrameEvaluation center = ev.frame(w);
            const Complex ih(0, h);
            FrameEvaluation st[4] = {ev.frame(w + h), ev.frame(w - h), ev.frame(w + ih),
                                     ev.frame(w - ih)};
            std::vector<double> K(n);
            for (int b = 0; b < n; ++b) {
                double lap = -8.0 * std::log(center.norms[b]);
                for (const auto& fe : st) lap += 2.0 * std::log(fe.norms[b]);
                K[b] = -0.25 * lap / (h * h);
                rep.frame_norms[b][pt] = center.norms[b];
            }
            rep.curvature_last[pt] = K[n - 1];
            for (int lvl = 0; lvl + 1 < n; ++lvl) {
                double num = center.norms[lvl] * center.norms[lvl];
                double den = center.norms[lvl + 1] * center.norms[lvl + 1];
                rep.coupling_ratios[lvl][pt] = num / den;
                double inv_ratio = den / num;
                double d = inv_ratio - K[lvl];
                if (!(d > 0.0)) throw DegenerateFrame("invariant_report: theta denominator");
                rep.second_fundamental[lvl][pt] = K[lvl] / std::sqrt(d);
            }
            for (auto& [key, vals] : rep.higher_products) {
                auto [i, j] = key;
                Vec img = T.block(i, j) * center.sections[j];
                vals[pt] = center.sections[i].dot(img) /
                           (center.norms[i] * center.norms[i]);
            }
        } catch (const DegenerateFrame&) {
            rep.valid[pt] = false;
        }
    });
    return rep;
}

namespace {

double rel_dev(double a, double b) {
    double m = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / m;
}

struct PairedReports {
    InvariantReport a, b;
    std::vector<bool> valid;
    double fraction;
};

PairedReports paired_reports(const FlagOperator& A, const FlagOperator& B, const PolarGrid& grid,
                             double h) {
    PairedReports pr{invariant_report(A, grid, h), invariant_report(B, grid, h), {}, 0.0};
    const std::size_t m = pr.a.points.size();
    pr.valid.assign(m, true);
    std::size_t ok = 0;
    for (std::size_t p = 0; p < m; ++p) {
        pr.valid[p] = pr.a.valid[p] && pr.b.valid[p];
        ok += pr.valid[p] ? 1 : 0;
    }
    pr.fraction = m ? double(ok) / double(m) : 0.0;
    return pr;
}

}  // namespace

EquivEvidence unitary_equiv_ofb(const FlagOperator& A, const FlagOperator& B,
                                const PolarGrid& grid, double curv_tol, double ratio_tol,
                                double h) {
    if (!A.is_ofb() || !B.is_ofb())
        throw DomainError("unitary_equiv_ofb: inputs must be strongly-flag (no Condition-A data)");
    EquivEvidence ev;
    if (A.block_count() != B.block_count()) {
        ev.verdict = EquivVerdict::NotEquivalent;
        ev.detail = "block-count mismatch";
        return ev;
    }
    const int n = A.block_count();
    PairedReports pr = paired_reports(A, B, grid, h);
    ev.valid_fraction = pr.fraction;
    for (std::size_t p = 0; p < pr.valid.size(); ++p) {
        if (!pr.valid[p]) continue;
        ev.max_curvature_dev = std::max(
            ev.max_curvature_dev, std::abs(pr.a.curvature_last[p] - pr.b.curvature_last[p]));
        for (int i = 0; i + 1 < n; ++i) {
            double ri = pr.a.frame_norms[i][p] / pr.b.frame_norms[i][p];
            double rj = pr.a.frame_norms[i + 1][p] / pr.b.frame_norms[i + 1][p];
            ev.max_ratio_dev = std::max(ev.max_ratio_dev, rel_dev(ri, rj));
        }
    }
    if (ev.valid_fraction < 0.9) {
        ev.verdict = EquivVerdict::Inconclusive;
        ev.detail = "too many grid points excluded for frame degeneracy";
        return ev;
    }
    bool equal = ev.max_curvature_dev <= curv_tol && ev.max_ratio_dev <= ratio_tol;
    ev.verdict = equal ? EquivVerdict::Equivalent : EquivVerdict::NotEquivalent;
    if (!equal) {
        std::ostringstream os;
        os << "curvature dev " << ev.max_curvature_dev << ", ratio dev " << ev.max_ratio_dev;
        ev.detail = os.str();
    }
    return ev;
}

EquivEvidence full_invariant_equiv(const FlagOperator& A, const FlagOperator& B,
                                   const PolarGrid& grid, double curv_tol, double ratio_tol,
                                   double h) {
    EquivEvidence ev;
    if (A.block_count() != B.block_count()) {
        ev.verdict = EquivVerdict::NotEquivalent;
        ev.detail = "block-count mismatch";
        return ev;
    }
    const int n = A.block_count();
    PairedReports pr = paired_reports(A, B, grid, h);
    ev.valid_fraction = pr.fraction;
    for (std::size_t p = 0; p < pr.valid.size(); ++p) {
        if (!pr.valid[p]) continue;
        ev.max_curvature_dev = std::max(
            ev.max_curvature_dev, std::abs(pr.a.curvature_last[p] - pr.b.curvature_last[p]));
        for (int lvl = 0; lvl + 1 < n; ++lvl)
            ev.max_theta_dev =
                std::max(ev.max_theta_dev, std::abs(pr.a.second_fundamental[lvl][p] -
                                                    pr.b.second_fundamental[lvl][p]));
        for (const auto& [key, va] : pr.a.higher_products) {
            const auto& vb = pr.b.higher_products.at(key);
            double m = std::max({1.0, std::abs(va[p]), std::abs(vb[p])});
            ev.max_higher_dev = std::max(ev.max_higher_dev, std::abs(va[p] - vb[p]) / m);
        }
    }
    if (ev.valid_fraction < 0.9) {
        ev.verdict = EquivVerdict::Inconclusive;
        ev.detail = "too many grid points excluded for frame degeneracy";
        return ev;
    }
    bool equal = ev.max_curvature_dev <= curv_tol && ev.max_theta_dev <= curv_tol &&
                 ev.max_higher_dev <= ratio_tol;
    ev.verdict = equal ? EquivVerdict::Equivalent : EquivVerdict::NotEquivalent;
    if (!equal) {
        std::ostringstream os;
        os << "curvature dev " << ev.max_curvature_dev << ", theta dev " << ev.max_theta_dev
           << ", higher-product dev " << ev.max_higher_dev;
        ev.detail = os.str();
    }
    return ev;
}

PropertyHEstimate property_h_estimate(const KernelSpace& s1, const KernelSpace& s2, int window) {
    if (window < 4) throw DomainError("property_h_estimate: window too small");
    if (window > std::min(s1.truncation(), s2.truncation()))
        throw DimensionError("property_h_estimate: window exceeds truncation");
    PropertyHEstimate est;
    for (int k = 1; k < window; ++k)
        est.samples.push_back(k * std::sqrt(s1.weight(k) / s2.weight(k)));
    const std::size_t m = est.samples.size();
    const std::size_t tail = m / 2;
    bool increasing = true, decreasing = true;
    for (std::size_t k = tail; k + 1 < m; ++k) {
        if (est.samples[k + 1] < est.samples[k] * (1.0 - 1e-12)) increasing = false;
        if (est.samples[k + 1] > est.samples[k] * (1.0 + 1e-12)) decreasing = false;
    }
    if (increasing && est.samples.back() >= 10.0 * est.samples.front())
        est.verdict = PropertyHEstimate::V::Diverges;
    else if (decreasing && est.samples.back() < 1.0)
        est.verdict = PropertyHEstimate::V::Fails;
    else
        est.verdict = PropertyHEstimate::V::Inconclusive;
    return est;
}

namespace {

std::vector<double> default_radii() {
    std::vector<double> r;
    for (int j = 0; j < 20; ++j) r.push_back(0.95 * j / 19.0);
    return r;
}

bool roots_outside_closed_disc(const Poly& p) {
    if (poly_degree(p) <= 0) return poly_degree(p) == 0;  // nonzero constant
    for (Complex z : poly_roots(p))
        if (std::abs(z) <= 1.0 + 1e-9) return false;
    return true;
}

}  // namespace

SimilarityVerdict similarity_test(const FlagOperator& A, const FlagOperator& B,
                                  const SimilarityOptions& opt) {
    SimilarityVerdict out;
    std::ostringstream pre;
    const int n = B.block_count();
    if (A.block_count() != n) pre << "block-count mismatch; ";
    for (int i = 0; i < n; ++i)
        if (!B.space(i) || !B.space(i)->is_power())
            pre << "B block " << i << " is not a power kernel; ";

    std::vector<int> orders = opt.orders;
    if (pre.str().empty()) {
        // hypothesis (1) asks for *some* order m_i per diagonal block; default 1
        if (orders.empty()) orders.assign(n, 1);
        if (static_cast<int>(orders.size()) != n) {
            pre << "expected " << n << " hypercontraction orders; ";
        }
        if (pre.str().empty())
            for (int i = 0; i < n; ++i) {
                int got = hypercontraction_order(A.diagonal(i), orders[i]);
                if (got < orders[i])
                    pre << "A block " << i << " is not a " << orders[i]
                        << "-hypercontraction (order " << got << "); ";
            }
        std::vector<Poly> phi = opt.phi;
        if (phi.empty()) phi.assign(std::max(0, n - 1), Poly{Complex(1)});
        if (static_cast<int>(phi.size()) != std::max(0, n - 1))
            pre << "expected " << n - 1 << " phi polynomials; ";
        else {
            for (int i = 0; i + 1 < n; ++i)
                if (!roots_outside_closed_disc(phi[i]))
                    pre << "phi_" << i << " is not invertible on the closed disc; ";
            if (pre.str().empty() && n >= 2) {
                double worst = 0.0;
                for (double r : {0.2, 0.4, 0.6, 0.8})
                    for (int a = 0; a < 8; ++a) {
                        Complex w = std::polar(r, 2 * M_PI * a / 8.0);
                        for (int i = 0; i + 1 < n; ++i) {
                            double lhs = std::norm(poly_eval(phi[i], w)) * coupling_ratio(A, i, w);
                            double rhs = coupling_ratio(B, i, w);
                            worst = std::max(worst, rel_dev(lhs, rhs));
                        }
                    }
                if (worst > opt.hyp2_tol)
                    pre << "hypothesis (2) ratio identity fails (dev " << worst << "); ";
            }
        }
    }
    if (!pre.str().empty()) {
        out.precondition_report = pre.str();
        out.verdict = SimilarityVerdict::V::Inconclusive;
        return out;
    }

    NormProvider na = FrameEvaluator(A).last_block_norm_sq();
    NormProvider nb = FrameEvaluator(B).last_block_norm_sq();
    auto psi = [&](Complex w) { return std::log(na(w)) - std::log(nb(w)); };

    out.radii = opt.radii.empty() ? default_radii() : opt.radii;
    out.psi0.resize(out.radii.size());
    for (std::size_t k = 0; k < out.radii.size(); ++k) out.psi0[k] = psi(Complex(out.radii[k], 0));
    out.sup_abs_psi0 = 0.0;
    for (double v : out.psi0) out.sup_abs_psi0 = std::max(out.sup_abs_psi0, std::abs(v));

    const double h = opt.stencil_h;
    out.min_laplacian = std::numeric_limits<double>::infinity();
    for (double r : out.radii) {
        if (r + 2 * h >= 1.0) continue;
        Complex w(r, 0);
        const Complex ih(0, h);
        double lap =
            (psi(w + h) + psi(w - h) + psi(w + ih) + psi(w - ih) - 4.0 * psi(w)) / (h * h);
        out.min_laplacian = std::min(out.min_laplacian, lap);
    }

    bool bounded = out.sup_abs_psi0 <= opt.bound;
    bool subharmonic = out.min_laplacian >= -opt.subharmonic_tol;
    bool monotone_tail = out.psi0.size() >= 5;
    for (std::size_t k = out.psi0.size() - 5; monotone_tail && k + 1 < out.psi0.size(); ++k)
        if (std::abs(out.psi0[k + 1]) < std::abs(out.psi0[k]) - 1e-12) monotone_tail = false;
    bool divergent =
        !subharmonic && monotone_tail && std::abs(out.psi0.back()) > opt.divergence_threshold;

    if (bounded && subharmonic)
        out.verdict = SimilarityVerdict::V::Similar;
    else if (divergent)
        out.verdict = SimilarityVerdict::V::NotSimilar;
    else
        out.verdict = SimilarityVerdict::V::Inconclusive;

    if (out.verdict == SimilarityVerdict::V::Similar) {
        bool kernel_backed = true;
        for (int i = 0; i < n; ++i)
            if (!A.space(i) || !B.space(i)) kernel_backed = false;
        if (kernel_backed) {
            try {
                SimilarityWitness w = similarity_witness(A, B, opt.phi, opt.witness_tol);
                out.witness_residual = w.residual;
                out.witnessed = w.ok && w.residual <= 1e-6;
            } catch (const Error&) {
                out.witnessed = false;
            }
        }
    }
    return out;
}

SimilarityWitness similarity_witness(const FlagOperator& A, const FlagOperator& B,
                                   const std::vector<Poly>&, double residual_tol) {
    SimilarityWitness out;
    const int n = A.block_count();
    if (B.block_count() != n) throw DimensionError("similarity_witness: block-count mismatch");
    const int dim = A.block_dim();
    if (B.block_dim() != dim) throw DimensionError("similarity_witness: truncation mismatch");
    for (int i = 0; i < n; ++i)
        if (!A.space(i) || !B.space(i))
            throw DomainError("similarity_witness: kernel-backed diagonals required");

    Mat WA = Mat::Identity(n * dim, n * dim), WAinv = WA, WB = WA;
    if (!A.is_ofb()) {
        UnipotentWitness w = build_intertwiner(A);
        WA = w.X;
        WAinv = w.X_inv;
    }
    if (!B.is_ofb()) {
        UnipotentWitness w = build_intertwiner(B);
        WB = w.X;
    }
    FlagOperator Aofb = A.ofb_truncation();
    FlagOperator Bofb = B.ofb_truncation();

    // X_{n-1} = diag(sqrt(a^B_k / a^A_k)); the chain X_i C^A_i = C^B_i X_{i+1}
    // descends through multiplier symbols when available, else rowwise LS.
    std::vector<Mat> blocks(n);
    {
        Vec d(dim);
        for (int k = 0; k < dim; ++k)
            d(k) = std::sqrt(B.space(n - 1)->weight(k) / A.space(n - 1)->weight(k));
        blocks[n - 1] = d.asDiagonal();
    }
    Poly gamma{Complex(1)};
    bool symbolic = true;
    for (int i = 0; i + 1 < n; ++i)
        if (!Aofb.coupling_symbol(i) || !Bofb.coupling_symbol(i)) symbolic = false;
    for (int i = n - 2; i >= 0; --i) {
        Mat D(dim, dim);
        {
            Vec d(dim);
            for (int k = 0; k < dim; ++k)
                d(k) = std::sqrt(B.space(i)->weight(k) / A.space(i)->weight(k));
            D = d.asDiagonal();
        }
        if (symbolic) {
            const Poly psiA_hat = poly_conj_coeffs(*Aofb.coupling_symbol(i));
            const Poly psiB_hat = poly_conj_coeffs(*Bofb.coupling_symbol(i));
            if (std::abs(psiA_hat[0]) == 0.0) {
                symbolic = false;
            } else {
                gamma = poly_mul(gamma, poly_mul(psiB_hat, series_reciprocal(psiA_hat, dim), dim),
                                 dim);
                Mat Mg = multiplier(*B.space(i), *B.space(i), poly_conj_coeffs(gamma)).entries;
                blocks[i] = Mg.adjoint() * D;
            }
        }
        if (!symbolic) {
            // rowwise diagonal least squares for X_i C^A_i = C^B_i X_{i+1}
            Mat rhs = Bofb.coupling(i) * blocks[i + 1];
            const Mat& CA = Aofb.coupling(i);
            Vec diag(dim);
            for (int r = 0; r < dim; ++r) {
                Complex num = CA.row(r).conjugate().dot(rhs.row(r));
                double den = CA.row(r).squaredNorm();
                diag(r) = den > 0 ? num / den : Complex(1);
            }
            blocks[i] = diag.asDiagonal();
        }
    }

    Mat Xbd = Mat::Zero(n * dim, n * dim);
    for (int i = 0; i < n; ++i) Xbd.block(i * dim, i * dim, dim, dim) = blocks[i];
    out.X = WB * Xbd * WAinv;

    int budget = std::max(A.symbol_degree_budget(), B.symbol_degree_budget()) + 2;
    double scale = std::max(operator_norm(A.assembled()), 1e-300) *
                   std::max(1.0, operator_norm(out.X));
    out.residual = block_corner_residual(out.X * A.assembled(), B.assembled() * out.X, n, dim,
                                         budget, scale);

    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(out.X.adjoint() * out.X), Eigen::EigenvaluesOnly);
    double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    out.condition_estimate =
        lo > 0 ? std::sqrt(hi / lo) : std::numeric_limits<double>::infinity();

    out.ok = out.residual <= residual_tol && std::isfinite(out.condition_estimate);
    if (!out.ok) out.note = "witness construction failed the least-squares residual gate";
    return out;
}

}  // namespace flagbundle
