#include "dyntucker/integrator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dyntucker {

namespace {

void check_increment(const TuckerTensor& y, const std::vector<DenseMatrix>& delta_factors, const char* op) {
    if (static_cast<int>(delta_factors.size()) != y.order()) {
        detail::throw_shape_error(std::string(op) + ": one factor increment per mode required");
    }
    for (int k = 0; k < y.order(); ++k) {
        const DenseMatrix& d = delta_factors[static_cast<size_t>(k)];
        if (d.rows() != y.factor(k).rows() || d.cols() != y.factor(k).cols()) {
            detail::throw_shape_error(std::string(op) + ": factor increment shape mismatch");
        }
    }
}

void check_rhs_shape(const RhsValue& adot, const TuckerTensor& y, const char* op) {
    const std::vector<int> shape =
        std::holds_alternative<DenseTensor>(adot) ? std::get<DenseTensor>(adot).shape() : std::get<TuckerTensor>(adot).shape();
    if (shape != y.shape()) detail::throw_shape_error(std::string(op) + ": derivative shape mismatch");
}

double rhs_norm(const RhsValue& adot) {
    return std::holds_alternative<DenseTensor>(adot) ? norm(std::get<DenseTensor>(adot))
                                                     : std::get<TuckerTensor>(adot).norm();
}

// Ȧ ×_{k≠skip} U_kᵀ, unfolded on mode `skip` (all modes contracted when skip < 0,
// in which case the full small tensor is returned via the other helper below).
DenseMatrix partial_unfold(const RhsValue& adot, const TuckerTensor& y, int skip) {
    if (std::holds_alternative<DenseTensor>(adot)) {
        DenseTensor t = std::get<DenseTensor>(adot);
        for (int k = 0; k < y.order(); ++k) {
            if (k == skip) continue;
            t = mode_product(t, k, transpose(y.factor(k)));
        }
        return unfold(t, skip);
    }
    const TuckerTensor& a = std::get<TuckerTensor>(adot);
    DenseTensor t = a.core();
    for (int k = 0; k < y.order(); ++k) {
        if (k == skip) continue;
        t = mode_product(t, k, mat_tmul(y.factor(k), a.factor(k)));
    }
    return mat_mul(a.factor(skip), unfold(t, skip));
}

// Ȧ ×_k U_kᵀ over all modes
DenseTensor full_contraction(const RhsValue& adot, const TuckerTensor& y) {
    if (std::holds_alternative<DenseTensor>(adot)) {
        DenseTensor t = std::get<DenseTensor>(adot);
        for (int k = 0; k < y.order(); ++k) t = mode_product(t, k, transpose(y.factor(k)));
        return t;
    }
    const TuckerTensor& a = std::get<TuckerTensor>(adot);
    DenseTensor t = a.core();
    for (int k = 0; k < y.order(); ++k) t = mode_product(t, k, mat_tmul(y.factor(k), a.factor(k)));
    return t;
}

// Derivative contractions against the (fixed) base factors of one step.
struct RhsContractions {
    DenseTensor projected;       // Ȧ ×_k U_kᵀ
    std::vector<DenseMatrix> g;  // G_n = [Ȧ ×_{k≠n} U_kᵀ]_(n) · 𝒞_(n)ᵀ
    double adot_norm = 0.0;
};

RhsContractions contract_rhs(const RhsValue& adot, const TuckerTensor& y) {
    RhsContractions out{full_contraction(adot, y), {}, rhs_norm(adot)};
    out.g.reserve(static_cast<size_t>(y.order()));
    for (int n = 0; n < y.order(); ++n) {
        out.g.push_back(mat_mult(partial_unfold(adot, y, n), unfold(y.core(), n)));
    }
    return out;
}

DenseTensor core_delta_from(const DenseTensor& projected, const TuckerTensor& y,
                            const std::vector<DenseMatrix>& delta_factors) {
    DenseTensor delta = projected;
    for (int k = 0; k < y.order(); ++k) {
        const DenseTensor term = mode_product(y.core(), k, mat_tmul(y.factor(k), delta_factors[static_cast<size_t>(k)]));
        delta = axpy(-1.0, term, delta);
    }
    return delta;
}

DenseMatrix assemble_bn_from(const DenseMatrix& gn, const TuckerTensor& y, const DenseTensor& delta_core,
                             const std::vector<DenseMatrix>& delta_factors, double h, double alpha, int n) {
    const DenseMatrix cn = unfold(y.core(), n);

    // M = Δ𝒞 + Σ_{k≠n} 𝒞 ×_k (U_kᵀ ΔU_k)
    DenseTensor m = delta_core;
    for (int k = 0; k < y.order(); ++k) {
        if (k == n) continue;
        m = axpy(1.0, mode_product(y.core(), k, mat_tmul(y.factor(k), delta_factors[static_cast<size_t>(k)])), m);
    }

    // E = (1/h)·𝒞_(n)𝒞_(n)ᵀ − M_(n)·𝒞_(n)ᵀ (+ α/h on the diagonal)
    DenseMatrix e = mat_add(mat_scale(1.0 / h, mat_mult(cn, cn)), mat_mult(unfold(m, n), cn), -1.0);
    if (alpha != 0.0) {
        const double shift = alpha / h;
        for (int i = 0; i < e.rows(); ++i) e(i, i) += shift;
    }
    return mat_add(gn, mat_mul(y.factor(n), e));
}

double fit_norm_from(const RhsContractions& rc, const TuckerTensor& y, const DenseTensor& delta_core,
                     const std::vector<DenseMatrix>& delta_factors) {
    const int d = y.order();
    double sq = rc.adot_norm * rc.adot_norm;
    const double dc_norm = norm(delta_core);
    sq += dc_norm * dc_norm;
    sq -= 2.0 * inner(rc.projected, delta_core);

    std::vector<DenseTensor> rotated;  // P_k = 𝒞 ×_k (U_kᵀ ΔU_k)
    rotated.reserve(static_cast<size_t>(d));
    for (int k = 0; k < d; ++k) {
        const DenseMatrix& du = delta_factors[static_cast<size_t>(k)];
        const DenseTensor scaled = mode_product(y.core(), k, du);
        sq += inner(scaled, scaled);
        sq -= 2.0 * mat_inner(du, rc.g[static_cast<size_t>(k)]);
        rotated.push_back(mode_product(y.core(), k, mat_tmul(y.factor(k), du)));
    }
    for (int k = 0; k < d; ++k) {
        sq += 2.0 * inner(delta_core, rotated[static_cast<size_t>(k)]);
        for (int l = 0; l < d; ++l) {
            if (l == k) continue;
            sq += inner(rotated[static_cast<size_t>(k)], rotated[static_cast<size_t>(l)]);
        }
    }
    return std::sqrt(std::max(sq, 0.0));
}

std::vector<DenseMatrix> zero_increments(const TuckerTensor& y) {
    std::vector<DenseMatrix> dz;
    dz.reserve(static_cast<size_t>(y.order()));
    for (int k = 0; k < y.order(); ++k) dz.emplace_back(y.factor(k).rows(), y.factor(k).cols());
    return dz;
}

}  // namespace

DenseTensor core_delta(const RhsValue& adot, const TuckerTensor& y, const std::vector<DenseMatrix>& delta_factors) {
    check_rhs_shape(adot, y, "core_delta");
    check_increment(y, delta_factors, "core_delta");
    return core_delta_from(full_contraction(adot, y), y, delta_factors);
}

DenseMatrix assemble_Bn(int n, const RhsValue& adot, const TuckerTensor& y, const DenseTensor& delta_core,
                        const std::vector<DenseMatrix>& delta_factors, double h, double alpha) {
    if (n < 0 || n >= y.order()) detail::throw_shape_error("assemble_Bn: mode index out of range");
    if (h <= 0.0) detail::throw_shape_error("assemble_Bn: step size must be positive");
    check_rhs_shape(adot, y, "assemble_Bn");
    check_increment(y, delta_factors, "assemble_Bn");
    if (delta_core.shape() != y.core().shape()) detail::throw_shape_error("assemble_Bn: core increment shape mismatch");
    const DenseMatrix gn = mat_mult(partial_unfold(adot, y, n), unfold(y.core(), n));
    return assemble_bn_from(gn, y, delta_core, delta_factors, h, alpha, n);
}

DenseMatrix factor_update(const DenseMatrix& bn) { return orthonormal_polar_factor(bn); }

double fit_norm(const TuckerTensor& y, const TangentIncrement& delta, const RhsValue& adot) {
    check_rhs_shape(adot, y, "fit_norm");
    check_increment(y, delta.delta_factors, "fit_norm");
    if (delta.delta_core.shape() != y.core().shape()) detail::throw_shape_error("fit_norm: core increment shape mismatch");
    return fit_norm_from(contract_rhs(adot, y), y, delta.delta_core, delta.delta_factors);
}

double fit_norm_dense(const TuckerTensor& y, const TangentIncrement& delta, const DenseTensor& adot) {
    if (adot.shape() != y.shape()) detail::throw_shape_error("fit_norm_dense: derivative shape mismatch");
    check_increment(y, delta.delta_factors, "fit_norm_dense");
    if (delta.delta_core.shape() != y.core().shape()) {
        detail::throw_shape_error("fit_norm_dense: core increment shape mismatch");
    }

    DenseTensor tangent = mode_product(delta.delta_core, 0, y.factor(0));
    for (int k = 1; k < y.order(); ++k) tangent = mode_product(tangent, k, y.factor(k));
    for (int k = 0; k < y.order(); ++k) {
        DenseTensor term = y.core();
        for (int l = 0; l < y.order(); ++l) {
            term = mode_product(term, l, l == k ? delta.delta_factors[static_cast<size_t>(l)] : y.factor(l));
        }
        tangent = axpy(1.0, term, tangent);
    }
    return norm(axpy(-1.0, adot, tangent));
}

std::pair<TuckerTensor, StepReport> als_euler_step_value(const TuckerTensor& y, const RhsValue& adot,
                                                         const IntegratorConfig& cfg, TangentIncrement* increment_out,
                                                         const TangentIncrement* warm_start) {
    check_rhs_shape(adot, y, "als_euler_step");
    if (cfg.step_size <= 0.0) detail::throw_shape_error("als_euler_step: step size must be positive");
    if (cfg.max_sweeps < 1) detail::throw_shape_error("als_euler_step: max_sweeps must be at least 1");
    const double h = cfg.step_size;
    const double alpha = cfg.regularization.alpha_for(h);
    if (alpha < 0.0) detail::throw_shape_error("als_euler_step: regularization must be nonnegative");
    const int d = y.order();

    const RhsContractions rc = contract_rhs(adot, y);
    // relative defect; falls back to the absolute defect for a vanishing derivative
    const double scale = rc.adot_norm > 0.0 ? rc.adot_norm : 1.0;

    std::vector<DenseMatrix> delta_u;
    if (cfg.warm_start_factors && warm_start) {
        check_increment(y, warm_start->delta_factors, "als_euler_step warm start");
        delta_u = warm_start->delta_factors;
    } else {
        delta_u = zero_increments(y);
    }
    DenseTensor delta_c = core_delta_from(rc.projected, y, delta_u);

    std::vector<DenseMatrix> updated = y.factors();
    double prev_defect = fit_norm_from(rc, y, delta_c, delta_u) / scale;

    StepReport report;
    report.regularization = alpha;
    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
        for (int n = 0; n < d; ++n) {
            const DenseMatrix bn =
                assemble_bn_from(rc.g[static_cast<size_t>(n)], y, delta_c, delta_u, h, alpha, n);
            DenseMatrix uh = orthonormal_polar_factor(bn);
            delta_u[static_cast<size_t>(n)] = mat_scale(1.0 / h, mat_add(uh, y.factor(n), -1.0));
            updated[static_cast<size_t>(n)] = std::move(uh);
        }
        delta_c = core_delta_from(rc.projected, y, delta_u);

        const double defect = fit_norm_from(rc, y, delta_c, delta_u) / scale;
        ++report.sweeps;
        report.defect_history.push_back(defect);
        if (!std::isfinite(defect)) {
            throw std::runtime_error("als_euler_step: non-finite defect after sweep " +
                                     std::to_string(report.sweeps) + " (h=" + std::to_string(h) + ")");
        }
        const double change =
            std::abs(defect - prev_defect) / std::max(prev_defect, std::numeric_limits<double>::epsilon());
        prev_defect = defect;
        if (change < cfg.fit_tolerance) break;
    }
    report.relative_defect = report.defect_history.back();

    if (increment_out) *increment_out = {delta_c, delta_u};

    DenseTensor new_core = axpy(h, delta_c, y.core());
    return {TuckerTensor(std::move(new_core), std::move(updated)), std::move(report)};
}

std::pair<TuckerTensor, StepReport> als_euler_step(const TuckerTensor& y, double t, const RhsProvider& rhs,
                                                   const IntegratorConfig& cfg, TangentIncrement* increment_out,
                                                   const TangentIncrement* warm_start) {
    return als_euler_step_value(y, rhs.derivative_at(t, y), cfg, increment_out, warm_start);
}

std::pair<TuckerTensor, StepReport> improved_euler_step(const TuckerTensor& y, double t, const RhsProvider& rhs,
                                                        const IntegratorConfig& cfg) {
    IntegratorConfig half = cfg;
    half.step_size = 0.5 * cfg.step_size;
    const TuckerTensor midpoint = als_euler_step(y, t, rhs, half).first;
    const RhsValue adot_mid = rhs.derivative_at(t + half.step_size, midpoint);
    return als_euler_step_value(y, adot_mid, cfg);
}

TuckerTensor gauged_reference_step(const TuckerTensor& y, double t, const RhsProvider& rhs, double h) {
    if (h <= 0.0) detail::throw_shape_error("gauged_reference_step: step size must be positive");
    const RhsValue adot = rhs.derivative_at(t, y);
    check_rhs_shape(adot, y, "gauged_reference_step");
    const int d = y.order();

    const DenseTensor delta_c = full_contraction(adot, y);
    std::vector<DenseMatrix> new_factors;
    new_factors.reserve(static_cast<size_t>(d));
    for (int n = 0; n < d; ++n) {
        const DenseMatrix pinv = pseudo_inverse_gram(unfold(y.core(), n));
        const DenseMatrix rhs_n = mat_mul(partial_unfold(adot, y, n), pinv);
        // project onto the orthogonal complement of range(U_n)
        const DenseMatrix udot = mat_add(rhs_n, mat_mul(y.factor(n), mat_tmul(y.factor(n), rhs_n)), -1.0);
        new_factors.push_back(mat_add(y.factor(n), udot, h));
    }

    DenseTensor core = axpy(h, delta_c, y.core());
    std::vector<DenseMatrix> ortho;
    ortho.reserve(static_cast<size_t>(d));
    for (int n = 0; n < d; ++n) {
        if (!all_finite(new_factors[static_cast<size_t>(n)])) {
            throw std::runtime_error("gauged_reference_step: non-finite factor update");
        }
        auto [q, r] = orthonormalize_columns(new_factors[static_cast<size_t>(n)]);
        core = mode_product(core, n, r);
        ortho.push_back(std::move(q));
    }
    return {std::move(core), std::move(ortho)};
}

}  // namespace dyntucker
