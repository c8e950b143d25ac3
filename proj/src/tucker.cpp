#include "dyntucker/tucker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dyntucker {

namespace {

constexpr double kOrthTol = 1e-8;

void check_rank_vector(const RankVector& r, const std::vector<int>& shape, const char* op) {
    if (r.size() != shape.size()) detail::throw_shape_error(std::string(op) + ": rank vector length mismatch");
    for (size_t k = 0; k < r.size(); ++k) {
        if (r[k] < 1 || r[k] > shape[k]) {
            detail::throw_shape_error(std::string(op) + ": rank must satisfy 1 <= r_k <= I_k");
        }
    }
}

// adot ×_{k in modes} U_kᵀ, contracting in increasing mode order
DenseTensor contract_all_but(const DenseTensor& a, const std::vector<DenseMatrix>& factors, int skip) {
    DenseTensor t = a;
    for (int k = 0; k < static_cast<int>(factors.size()); ++k) {
        if (k == skip) continue;
        t = mode_product(t, k, transpose(factors[static_cast<size_t>(k)]));
    }
    return t;
}

}  // namespace

TuckerTensor::TuckerTensor(DenseTensor core, std::vector<DenseMatrix> factors)
    : core_(std::move(core)), factors_(std::move(factors)) {
    if (static_cast<int>(factors_.size()) != core_.order()) {
        detail::throw_shape_error("TuckerTensor: one factor per mode required");
    }
    for (int k = 0; k < core_.order(); ++k) {
        const DenseMatrix& u = factors_[static_cast<size_t>(k)];
        if (u.cols() != core_.extent(k)) {
            detail::throw_shape_error("TuckerTensor: factor columns must match core extent");
        }
        if (u.rows() < u.cols()) {
            detail::throw_shape_error("TuckerTensor: rank exceeds mode size");
        }
        if (gram_deviation(u) > kOrthTol) {
            detail::throw_shape_error("TuckerTensor: factor columns are not orthonormal");
        }
    }
}

std::vector<int> TuckerTensor::shape() const {
    std::vector<int> s(factors_.size());
    for (size_t k = 0; k < factors_.size(); ++k) s[k] = factors_[k].rows();
    return s;
}

DenseTensor to_full(const TuckerTensor& y) {
    DenseTensor t = y.core();
    for (int k = 0; k < y.order(); ++k) t = mode_product(t, k, y.factor(k));
    return t;
}

TuckerTensor gauge_rotate(const TuckerTensor& y, const std::vector<DenseMatrix>& q) {
    if (static_cast<int>(q.size()) != y.order()) {
        detail::throw_shape_error("gauge_rotate: one rotation per mode required");
    }
    DenseTensor core = y.core();
    std::vector<DenseMatrix> factors;
    factors.reserve(q.size());
    for (int k = 0; k < y.order(); ++k) {
        const DenseMatrix& qk = q[static_cast<size_t>(k)];
        if (qk.rows() != qk.cols() || qk.rows() != y.core().extent(k)) {
            detail::throw_shape_error("gauge_rotate: rotation size must match rank");
        }
        if (gram_deviation(qk) > 1e-10) {
            detail::throw_shape_error("gauge_rotate: rotation is not orthogonal");
        }
        factors.push_back(mat_mul(y.factor(k), qk));
        core = mode_product(core, k, transpose(qk));
    }
    return {std::move(core), std::move(factors)};
}

DenseMatrix leading_left_vectors(const DenseMatrix& m, int k) {
    if (k > m.rows()) detail::throw_shape_error("leading_left_vectors: k exceeds row count");
    DenseMatrix basis(1, 1);
    if (m.rows() <= m.cols()) {
        // left vectors of a wide matrix are the right factors of its transpose
        basis = economy_svd(transpose(m)).right;
    } else {
        basis = economy_svd(m).left;
    }
    if (basis.cols() == k) return basis;
    if (basis.cols() > k) {
        DenseMatrix lead(basis.rows(), k);
        for (int j = 0; j < k; ++j) std::copy(basis.col(j), basis.col(j) + basis.rows(), lead.col(j));
        return lead;
    }
    return complete_orthonormal(basis, k);
}

std::pair<DenseMatrix, DenseMatrix> orthonormalize_columns(const DenseMatrix& f) {
    if (f.cols() <= f.rows()) {
        QrResult qr = qr_decompose(f);
        return {std::move(qr.q), std::move(qr.r)};
    }
    // wide: fᵀ = L Σ Rᵀ gives f = R (Σ Lᵀ) with R square orthogonal
    SvdResult svd = economy_svd(transpose(f));
    DenseMatrix s(f.rows(), f.cols());
    for (int j = 0; j < f.cols(); ++j) {
        double* sj = s.col(j);
        for (int i = 0; i < f.rows(); ++i) sj[i] = svd.singular_values[static_cast<size_t>(i)] * svd.left(j, i);
    }
    return {std::move(svd.right), std::move(s)};
}

TuckerTensor hosvd(const DenseTensor& a, const RankVector& r) {
    check_rank_vector(r, a.shape(), "hosvd");
    std::vector<DenseMatrix> factors;
    factors.reserve(r.size());
    for (int n = 0; n < a.order(); ++n) {
        factors.push_back(leading_left_vectors(unfold(a, n), r[static_cast<size_t>(n)]));
    }
    DenseTensor core = contract_all_but(a, factors, -1);
    return {std::move(core), std::move(factors)};
}

TuckerTensor hooi(const DenseTensor& a, const RankVector& r, const HooiOptions& opt, HooiReport* report) {
    check_rank_vector(r, a.shape(), "hooi");
    TuckerTensor init = hosvd(a, r);
    std::vector<DenseMatrix> factors = init.factors();

    double prev_fit = -1.0;
    int sweeps = 0;
    std::vector<double> history;
    DenseTensor core = init.core();
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        for (int n = 0; n < a.order(); ++n) {
            const DenseTensor partial = contract_all_but(a, factors, n);
            factors[static_cast<size_t>(n)] = leading_left_vectors(unfold(partial, n), r[static_cast<size_t>(n)]);
        }
        core = contract_all_but(a, factors, -1);
        const double fit = norm(core);
        history.push_back(fit);
        ++sweeps;
        if (prev_fit >= 0.0 &&
            std::abs(fit - prev_fit) <= opt.tol * std::max(prev_fit, std::numeric_limits<double>::min())) {
            break;
        }
        prev_fit = fit;
    }
    if (report) *report = {sweeps, std::move(history)};
    return {std::move(core), std::move(factors)};
}

TuckerTensor tucker_sum(const std::vector<TuckerTensor>& ys, const std::vector<double>& coeffs) {
    if (ys.empty()) detail::throw_shape_error("tucker_sum: empty term list");
    if (ys.size() != coeffs.size()) detail::throw_shape_error("tucker_sum: one coefficient per term required");
    const int d = ys.front().order();
    const std::vector<int> shape = ys.front().shape();
    for (const TuckerTensor& y : ys) {
        if (y.shape() != shape) detail::throw_shape_error("tucker_sum: tensor shapes differ");
    }

    std::vector<int> cat_ranks(static_cast<size_t>(d), 0);
    for (const TuckerTensor& y : ys) {
        for (int k = 0; k < d; ++k) cat_ranks[static_cast<size_t>(k)] += y.core().extent(k);
    }

    // concatenated factors and block-diagonal core scaled by the coefficients
    std::vector<DenseMatrix> cat(static_cast<size_t>(d), DenseMatrix(1, 1));
    for (int k = 0; k < d; ++k) {
        DenseMatrix f(shape[static_cast<size_t>(k)], cat_ranks[static_cast<size_t>(k)]);
        int off = 0;
        for (const TuckerTensor& y : ys) {
            const DenseMatrix& u = y.factor(k);
            for (int j = 0; j < u.cols(); ++j) std::copy(u.col(j), u.col(j) + u.rows(), f.col(off + j));
            off += u.cols();
        }
        cat[static_cast<size_t>(k)] = std::move(f);
    }

    DenseTensor block(cat_ranks);
    std::vector<int> offsets(static_cast<size_t>(d), 0);
    for (size_t i = 0; i < ys.size(); ++i) {
        const DenseTensor& c = ys[i].core();
        std::vector<int> idx(static_cast<size_t>(d), 0);
        std::vector<int> dst(static_cast<size_t>(d));
        for (int64_t l = 0; l < c.size(); ++l) {
            for (int k = 0; k < d; ++k) dst[static_cast<size_t>(k)] = offsets[static_cast<size_t>(k)] + idx[static_cast<size_t>(k)];
            block.at(dst) = coeffs[i] * c[l];
            for (int k = 0; k < d; ++k) {
                if (++idx[static_cast<size_t>(k)] < c.extent(k)) break;
                idx[static_cast<size_t>(k)] = 0;
            }
        }
        for (int k = 0; k < d; ++k) offsets[static_cast<size_t>(k)] += c.extent(k);
    }

    DenseTensor core = std::move(block);
    std::vector<DenseMatrix> factors;
    factors.reserve(static_cast<size_t>(d));
    for (int k = 0; k < d; ++k) {
        auto [q, s] = orthonormalize_columns(cat[static_cast<size_t>(k)]);
        core = mode_product(core, k, s);
        factors.push_back(std::move(q));
    }
    return {std::move(core), std::move(factors)};
}

TuckerTensor tucker_hadamard(const TuckerTensor& y1, const TuckerTensor& y2,
                             const std::optional<RankVector>& overflow_rank, const HooiOptions& overflow_opt) {
    if (y1.shape() != y2.shape()) detail::throw_shape_error("tucker_hadamard: tensor shapes differ");
    const int d = y1.order();
    const std::vector<int> shape = y1.shape();

    bool overflow = false;
    for (int k = 0; k < d; ++k) {
        if (static_cast<int64_t>(y1.core().extent(k)) * y2.core().extent(k) > shape[static_cast<size_t>(k)]) {
            overflow = true;
        }
    }
    if (overflow) {
        if (!overflow_rank) {
            detail::throw_shape_error("tucker_hadamard: product rank exceeds mode size; supply an overflow rank");
        }
        RankVector cap1(static_cast<size_t>(d)), cap2(static_cast<size_t>(d));
        for (int k = 0; k < d; ++k) {
            const int cap = std::min((*overflow_rank)[static_cast<size_t>(k)], shape[static_cast<size_t>(k)]);
            cap1[static_cast<size_t>(k)] = std::min(cap, y1.core().extent(k));
            cap2[static_cast<size_t>(k)] = std::min(cap, y2.core().extent(k));
        }
        const TuckerTensor z1 = recompress(y1, cap1, overflow_opt);
        const TuckerTensor z2 = recompress(y2, cap2, overflow_opt);
        for (int k = 0; k < d; ++k) {
            if (static_cast<int64_t>(cap1[static_cast<size_t>(k)]) * cap2[static_cast<size_t>(k)] >
                shape[static_cast<size_t>(k)]) {
                detail::throw_shape_error("tucker_hadamard: product rank still exceeds mode size after recompression");
            }
        }
        return tucker_hadamard(z1, z2, std::nullopt, overflow_opt);
    }

    const DenseTensor& c1 = y1.core();
    const DenseTensor& c2 = y2.core();
    std::vector<int> prod_ranks(static_cast<size_t>(d));
    for (int k = 0; k < d; ++k) prod_ranks[static_cast<size_t>(k)] = c1.extent(k) * c2.extent(k);

    // factors: columnwise products, column (a,b) stored at a + r1*b
    std::vector<DenseMatrix> cat;
    cat.reserve(static_cast<size_t>(d));
    for (int k = 0; k < d; ++k) {
        const DenseMatrix& u1 = y1.factor(k);
        const DenseMatrix& u2 = y2.factor(k);
        DenseMatrix w(shape[static_cast<size_t>(k)], prod_ranks[static_cast<size_t>(k)]);
        for (int b = 0; b < u2.cols(); ++b) {
            for (int a = 0; a < u1.cols(); ++a) {
                double* wc = w.col(a + u1.cols() * b);
                const double* c1a = u1.col(a);
                const double* c2b = u2.col(b);
                for (int i = 0; i < w.rows(); ++i) wc[i] = c1a[i] * c2b[i];
            }
        }
        cat.push_back(std::move(w));
    }

    // core: outer product on paired indices, matching the factor column order
    DenseTensor core(prod_ranks);
    std::vector<int> idx(static_cast<size_t>(d), 0);
    std::vector<int> ia(static_cast<size_t>(d)), ib(static_cast<size_t>(d));
    for (int64_t l = 0; l < core.size(); ++l) {
        for (int k = 0; k < d; ++k) {
            ia[static_cast<size_t>(k)] = idx[static_cast<size_t>(k)] % c1.extent(k);
            ib[static_cast<size_t>(k)] = idx[static_cast<size_t>(k)] / c1.extent(k);
        }
        core[l] = c1.at(ia) * c2.at(ib);
        for (int k = 0; k < d; ++k) {
            if (++idx[static_cast<size_t>(k)] < core.extent(k)) break;
            idx[static_cast<size_t>(k)] = 0;
        }
    }

    std::vector<DenseMatrix> factors;
    factors.reserve(static_cast<size_t>(d));
    for (int k = 0; k < d; ++k) {
        auto [q, s] = orthonormalize_columns(cat[static_cast<size_t>(k)]);
        core = mode_product(core, k, s);
        factors.push_back(std::move(q));
    }
    return {std::move(core), std::move(factors)};
}

TuckerTensor apply_kron_sum_operator(const std::vector<DenseMatrix>& k_ops, const TuckerTensor& y) {
    const int d = y.order();
    if (static_cast<int>(k_ops.size()) != d) {
        detail::throw_shape_error("apply_kron_sum_operator: one operator per mode required");
    }
    const std::vector<int> shape = y.shape();
    for (int k = 0; k < d; ++k) {
        const DenseMatrix& op = k_ops[static_cast<size_t>(k)];
        if (op.rows() != op.cols() || op.rows() != shape[static_cast<size_t>(k)]) {
            detail::throw_shape_error("apply_kron_sum_operator: operator must be square of the mode size");
        }
    }

    std::vector<TuckerTensor> terms;
    terms.reserve(static_cast<size_t>(d));
    for (int k = 0; k < d; ++k) {
        auto [q, s] = orthonormalize_columns(mat_mul(k_ops[static_cast<size_t>(k)], y.factor(k)));
        std::vector<DenseMatrix> factors = y.factors();
        factors[static_cast<size_t>(k)] = std::move(q);
        terms.emplace_back(mode_product(y.core(), k, s), std::move(factors));
    }
    return tucker_sum(terms, std::vector<double>(static_cast<size_t>(d), 1.0));
}

TuckerTensor recompress(const TuckerTensor& y, const RankVector& r, const HooiOptions& opt, HooiReport* report) {
    check_rank_vector(r, y.shape(), "recompress");
    const int d = y.order();
    const DenseTensor& cin = y.core();

    // HOSVD initialization from Gram matrices of the input core unfoldings:
    // the left singular vectors of the full unfolding are V_n times those of
    // the core unfolding because the off-mode factors are isometries.
    std::vector<DenseMatrix> factors;
    factors.reserve(static_cast<size_t>(d));
    for (int n = 0; n < d; ++n) {
        const DenseMatrix cn = unfold(cin, n);
        const DenseMatrix gram = mat_mult(cn, cn);
        const DenseMatrix basis = economy_svd(gram).left;
        const int take = std::min(r[static_cast<size_t>(n)], basis.cols());
        DenseMatrix lead(basis.rows(), take);
        for (int j = 0; j < take; ++j) std::copy(basis.col(j), basis.col(j) + basis.rows(), lead.col(j));
        DenseMatrix u = mat_mul(y.factor(n), lead);
        if (take < r[static_cast<size_t>(n)]) u = complete_orthonormal(u, r[static_cast<size_t>(n)]);
        factors.push_back(std::move(u));
    }

    auto shrink = [&](int skip) {
        // cin ×_{k != skip} (U_kᵀ V_k)
        DenseTensor t = cin;
        for (int k = 0; k < d; ++k) {
            if (k == skip) continue;
            t = mode_product(t, k, mat_tmul(factors[static_cast<size_t>(k)], y.factor(k)));
        }
        return t;
    };

    double prev_fit = -1.0;
    int sweeps = 0;
    std::vector<double> history;
    DenseTensor core({1, 1});
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        for (int n = 0; n < d; ++n) {
            const DenseMatrix s = unfold(shrink(n), n);  // r'_n x prod_{k != n} r_k
            const int take = std::min(r[static_cast<size_t>(n)], s.rows());
            DenseMatrix u = mat_mul(y.factor(n), leading_left_vectors(s, take));
            if (take < r[static_cast<size_t>(n)]) u = complete_orthonormal(u, r[static_cast<size_t>(n)]);
            factors[static_cast<size_t>(n)] = std::move(u);
        }
        core = shrink(-1);
        const double fit = norm(core);
        history.push_back(fit);
        ++sweeps;
        if (prev_fit >= 0.0 &&
            std::abs(fit - prev_fit) <= opt.tol * std::max(prev_fit, std::numeric_limits<double>::min())) {
            break;
        }
        prev_fit = fit;
    }
    if (report) *report = {sweeps, std::move(history)};
    return {std::move(core), std::move(factors)};
}

}  // namespace dyntucker
