#include "dyntucker/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>

namespace dyntucker {

namespace {

std::atomic<uint64_t> g_pinv_calls{0};

void require_finite(const DenseMatrix& m, const char* op) {
    if (!all_finite(m)) throw std::invalid_argument(std::string(op) + ": non-finite entries");
}

// Appends to u (rows x k, orthonormal columns, k < rows) one more column:
// the unit vector with the largest residual after projecting out the existing
// columns, re-orthogonalized twice and normalized. Deterministic.
void append_completion_column(DenseMatrix& u, int k) {
    const int rows = u.rows();
    std::vector<double> best;
    double best_norm = -1.0;
    int best_i = 0;
    std::vector<double> v(rows);
    for (int cand = 0; cand < rows; ++cand) {
        std::fill(v.begin(), v.end(), 0.0);
        v[cand] = 1.0;
        for (int j = 0; j < k; ++j) {
            const double* uj = u.col(j);
            double dot = uj[cand];
            for (int i = 0; i < rows; ++i) v[i] -= dot * uj[i];
        }
        double nrm2 = 0.0;
        for (double x : v) nrm2 += x * x;
        if (nrm2 > best_norm) {
            best_norm = nrm2;
            best = v;
            best_i = cand;
        }
    }
    (void)best_i;
    if (best_norm <= 1e-16) {
        throw std::runtime_error("complete_orthonormal: no direction left to complete with");
    }
    // one re-orthogonalization pass for numerical cleanliness
    for (int j = 0; j < k; ++j) {
        const double* uj = u.col(j);
        double dot = 0.0;
        for (int i = 0; i < rows; ++i) dot += uj[i] * best[i];
        for (int i = 0; i < rows; ++i) best[i] -= dot * uj[i];
    }
    double nrm = 0.0;
    for (double x : best) nrm += x * x;
    nrm = std::sqrt(nrm);
    double* uk = u.col(k);
    for (int i = 0; i < rows; ++i) uk[i] = best[i] / nrm;
}

}  // namespace

DenseMatrix complete_orthonormal(const DenseMatrix& m, int total_cols) {
    if (total_cols > m.rows()) {
        throw std::invalid_argument("complete_orthonormal: cannot exceed row count");
    }
    if (total_cols <= m.cols()) return m;
    DenseMatrix u(m.rows(), total_cols);
    for (int j = 0; j < m.cols(); ++j) {
        std::copy(m.col(j), m.col(j) + m.rows(), u.col(j));
    }
    for (int k = m.cols(); k < total_cols; ++k) append_completion_column(u, k);
    return u;
}

SvdResult economy_svd(const DenseMatrix& b) {
    if (b.rows() < b.cols()) throw std::invalid_argument("economy_svd: requires rows >= cols");
    require_finite(b, "economy_svd");

    const int m = b.rows();
    const int n = b.cols();
    DenseMatrix w = b;                       // working columns, rotated in place
    DenseMatrix v = DenseMatrix::identity(n);  // accumulated right rotations

    // Columns driven more than ~150 decades below the dominant one are pure
    // cancellation residue (their squared norms are not even representable);
    // deflating them to exact zero keeps the sweep from stalling on rotations
    // whose angle underflows. Relative accuracy of every singular value above
    // that floor is unaffected.
    double max_col = 0.0;
    for (int j = 0; j < n; ++j) {
        double nrm2 = 0.0;
        const double* wj = w.col(j);
        for (int i = 0; i < m; ++i) nrm2 += wj[i] * wj[i];
        max_col = std::max(max_col, nrm2);
    }
    const double deflate = std::sqrt(max_col) * 1e-150;
    auto deflate_if_negligible = [&](double* col, double nrm2) {
        if (nrm2 > 0.0 && std::sqrt(nrm2) <= deflate) {
            std::fill(col, col + m, 0.0);
            return 0.0;
        }
        return nrm2;
    };

    // Hestenes one-sided Jacobi: orthogonalize column pairs until every pair
    // satisfies |<w_p,w_q>| <= tol * ||w_p|| * ||w_q||.
    const double tol = 1e-15;
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double* wp = w.col(p);
                double* wq = w.col(q);
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (int i = 0; i < m; ++i) {
                    app += wp[i] * wp[i];
                    aqq += wq[i] * wq[i];
                    apq += wp[i] * wq[i];
                }
                app = deflate_if_negligible(wp, app);
                aqq = deflate_if_negligible(wq, aqq);
                if (app == 0.0 || aqq == 0.0) continue;
                if (std::abs(apq) <= tol * std::sqrt(app) * std::sqrt(aqq)) continue;
                rotated = true;

                const double tau = (aqq - app) / (2.0 * apq);
                // hypot keeps the angle nonzero even when tau² would overflow
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(1.0, tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;

                for (int i = 0; i < m; ++i) {
                    const double xp = wp[i], xq = wq[i];
                    wp[i] = c * xp - s * xq;
                    wq[i] = s * xp + c * xq;
                }
                double* vp = v.col(p);
                double* vq = v.col(q);
                for (int i = 0; i < n; ++i) {
                    const double xp = vp[i], xq = vq[i];
                    vp[i] = c * xp - s * xq;
                    vq[i] = s * xp + c * xq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sigma(n);
    for (int j = 0; j < n; ++j) {
        double nrm2 = 0.0;
        const double* wj = w.col(j);
        for (int i = 0; i < m; ++i) nrm2 += wj[i] * wj[i];
        sigma[j] = std::sqrt(nrm2);
    }

    // stable nonincreasing order
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](int a, int c) { return sigma[a] > sigma[c]; });

    SvdResult out{DenseMatrix(m, n), std::vector<double>(n), DenseMatrix(n, n)};
    int zero_cols = 0;
    for (int j = 0; j < n; ++j) {
        const int src = perm[j];
        out.singular_values[j] = sigma[src];
        double* rj = out.right.col(j);
        const double* vs = v.col(src);
        std::copy(vs, vs + n, rj);
        if (sigma[src] > 0.0) {
            double* lj = out.left.col(j);
            const double* ws = w.col(src);
            for (int i = 0; i < m; ++i) lj[i] = ws[i] / sigma[src];
        } else {
            ++zero_cols;
        }
    }
    if (zero_cols > 0) {
        // deterministic orthonormal completion for exactly-zero columns; the
        // nonzero columns come first after sorting
        DenseMatrix u(m, n);
        const int kept = n - zero_cols;
        for (int j = 0; j < kept; ++j) std::copy(out.left.col(j), out.left.col(j) + m, u.col(j));
        for (int k = kept; k < n; ++k) append_completion_column(u, k);
        out.left = u;
    }

    // sign convention: largest-magnitude entry of each left vector positive
    for (int j = 0; j < n; ++j) {
        double* lj = out.left.col(j);
        int arg = 0;
        double mag = std::abs(lj[0]);
        for (int i = 1; i < m; ++i) {
            if (std::abs(lj[i]) > mag) {
                mag = std::abs(lj[i]);
                arg = i;
            }
        }
        if (lj[arg] < 0.0) {
            for (int i = 0; i < m; ++i) lj[i] = -lj[i];
            double* rj = out.right.col(j);
            for (int i = 0; i < n; ++i) rj[i] = -rj[i];
        }
    }
    return out;
}

DenseMatrix orthonormal_polar_factor(const DenseMatrix& b) {
    if (b.rows() < b.cols()) throw std::invalid_argument("orthonormal_polar_factor: requires rows >= cols");
    require_finite(b, "orthonormal_polar_factor");
    const SvdResult svd = economy_svd(b);
    return mat_mult(svd.left, svd.right);  // R·Tᵀ
}

DenseMatrix pseudo_inverse_gram(const DenseMatrix& c) {
    g_pinv_calls.fetch_add(1, std::memory_order_relaxed);
    require_finite(c, "pseudo_inverse_gram");

    const DenseMatrix gram = mat_mult(c, c);  // C·Cᵀ, symmetric positive semidefinite
    const SvdResult svd = economy_svd(gram);
    const double smax = svd.singular_values.front();
    const double smin = svd.singular_values.back();
    if (smin <= 0.0 || smax / smin > 1e14) {
        throw SingularGramError("pseudo_inverse_gram: Gram matrix numerically singular (condition estimate " +
                                std::to_string(smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity()) +
                                ")");
    }
    // (CCᵀ)⁻¹ = T·diag(1/σ)·Rᵀ
    DenseMatrix scaled = svd.right;
    for (int j = 0; j < scaled.cols(); ++j) {
        double* col = scaled.col(j);
        for (int i = 0; i < scaled.rows(); ++i) col[i] /= svd.singular_values[j];
    }
    const DenseMatrix gram_inv = mat_mult(scaled, svd.left);
    return mat_tmul(c, gram_inv);  // Cᵀ·(CCᵀ)⁻¹
}

uint64_t pseudo_inverse_call_count() { return g_pinv_calls.load(std::memory_order_relaxed); }

DenseMatrix matrix_exponential(const DenseMatrix& w) {
    if (w.rows() != w.cols()) throw std::invalid_argument("matrix_exponential: matrix must be square");
    require_finite(w, "matrix_exponential");
    const int n = w.rows();

    // scale so the 1-norm is at most 1/2, exponentiate by Taylor, square back
    double norm1 = 0.0;
    for (int j = 0; j < n; ++j) {
        double colsum = 0.0;
        for (int i = 0; i < n; ++i) colsum += std::abs(w(i, j));
        norm1 = std::max(norm1, colsum);
    }
    int squarings = 0;
    double scale = 1.0;
    while (norm1 * scale > 0.5) {
        scale *= 0.5;
        ++squarings;
    }

    const DenseMatrix ws = mat_scale(scale, w);
    DenseMatrix result = DenseMatrix::identity(n);
    DenseMatrix term = DenseMatrix::identity(n);
    for (int k = 1; k <= 40; ++k) {
        term = mat_scale(1.0 / k, mat_mul(term, ws));
        result = mat_add(result, term);
        if (mat_norm(term) <= std::numeric_limits<double>::epsilon() * mat_norm(result)) break;
    }
    for (int s = 0; s < squarings; ++s) result = mat_mul(result, result);
    return result;
}

QrResult qr_decompose(const DenseMatrix& m) {
    if (m.rows() < m.cols()) throw std::invalid_argument("qr_decompose: requires rows >= cols");
    require_finite(m, "qr_decompose");
    const int rows = m.rows();
    const int cols = m.cols();

    DenseMatrix a = m;  // reduced to R in place; reflectors stored below the diagonal
    std::vector<double> beta(cols, 0.0);
    for (int k = 0; k < cols; ++k) {
        double* ak = a.col(k);
        double sigma = 0.0;
        for (int i = k; i < rows; ++i) sigma += ak[i] * ak[i];
        sigma = std::sqrt(sigma);
        if (sigma == 0.0) {
            beta[k] = 0.0;
            continue;
        }
        const double alpha = (ak[k] >= 0.0) ? -sigma : sigma;
        const double vk = ak[k] - alpha;
        beta[k] = -vk / alpha;  // 2/vᵀv after normalizing v_k to 1
        for (int i = k + 1; i < rows; ++i) ak[i] /= vk;
        ak[k] = alpha;
        for (int j = k + 1; j < cols; ++j) {
            double* aj = a.col(j);
            double dot = aj[k];
            for (int i = k + 1; i < rows; ++i) dot += ak[i] * aj[i];
            dot *= beta[k];
            aj[k] -= dot;
            for (int i = k + 1; i < rows; ++i) aj[i] -= dot * ak[i];
        }
    }

    // form the thin Q by applying reflectors to the leading identity columns
    DenseMatrix q(rows, cols);
    for (int j = 0; j < cols; ++j) q(j, j) = 1.0;
    for (int k = cols - 1; k >= 0; --k) {
        if (beta[k] == 0.0) continue;
        const double* ak = a.col(k);
        for (int j = 0; j < cols; ++j) {
            double* qj = q.col(j);
            double dot = qj[k];
            for (int i = k + 1; i < rows; ++i) dot += ak[i] * qj[i];
            dot *= beta[k];
            qj[k] -= dot;
            for (int i = k + 1; i < rows; ++i) qj[i] -= dot * ak[i];
        }
    }

    DenseMatrix r(cols, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i <= j; ++i) r(i, j) = a(i, j);

    // fix signs so the diagonal of R is nonnegative
    for (int k = 0; k < cols; ++k) {
        if (r(k, k) < 0.0) {
            for (int j = k; j < cols; ++j) r(k, j) = -r(k, j);
            double* qk = q.col(k);
            for (int i = 0; i < rows; ++i) qk[i] = -qk[i];
        }
    }
    return {std::move(q), std::move(r)};
}

DenseMatrix qr_orthonormalize(const DenseMatrix& m) {
    QrResult qr = qr_decompose(m);
    double dmax = 0.0;
    for (int k = 0; k < qr.r.cols(); ++k) dmax = std::max(dmax, qr.r(k, k));
    for (int k = 0; k < qr.r.cols(); ++k) {
        if (qr.r(k, k) <= 1e-12 * dmax || qr.r(k, k) == 0.0) {
            throw std::invalid_argument("qr_orthonormalize: input is numerically rank deficient");
        }
    }
    return std::move(qr.q);
}

}  // namespace dyntucker
