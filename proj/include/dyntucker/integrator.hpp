#pragma once

#include <variant>
#include <vector>

#include "dyntucker/tucker.hpp"

namespace dyntucker {

/// Derivative value: a dense tensor, or a Tucker tensor when the problem is
/// too large to densify (its rank may differ from the state's).
using RhsValue = std::variant<DenseTensor, TuckerTensor>;

/// Supplies the ambient derivative: either time-series data Ȧ(t) that ignores
/// the state, or an ODE right-hand side F(t, Y).
class RhsProvider {
public:
    virtual ~RhsProvider() = default;
    virtual RhsValue derivative_at(double t, const TuckerTensor& y) const = 0;
};

/// Discrete tangent update: core increment plus one factor increment per mode.
/// No gauge condition is imposed; U_kᵀ·delta_factors[k] is generally nonzero.
struct TangentIncrement {
    DenseTensor delta_core;
    std::vector<DenseMatrix> delta_factors;
};

struct Regularization {
    enum class Mode { off, h_squared, fixed };
    Mode mode = Mode::off;
    double value = 0.0;

    static Regularization off() { return {}; }
    static Regularization h_squared() { return {Mode::h_squared, 0.0}; }
    static Regularization fixed(double alpha) { return {Mode::fixed, alpha}; }

    double alpha_for(double h) const {
        switch (mode) {
            case Mode::h_squared: return h * h;
            case Mode::fixed: return value;
            default: return 0.0;
        }
    }
};

enum class Scheme { euler, improved_euler, gauged_reference };

struct IntegratorConfig {
    double step_size = 1e-3;
    double fit_tolerance = 1e-5;  // relative change of the defect between sweeps
    int max_sweeps = 10;
    Regularization regularization{};
    Scheme scheme = Scheme::euler;
    bool warm_start_factors = false;  // reuse the previous step's factor increments
};

struct StepReport {
    int sweeps = 0;
    double relative_defect = 0.0;        // defect / ||Ȧ|| after the last sweep
    std::vector<double> defect_history;  // one relative defect per sweep
    double regularization = 0.0;         // alpha actually used
};

/// Core increment for given factor increments:
///   Δ𝒞 = Ȧ ×_k U_kᵀ − Σ_k 𝒞 ×_k (U_kᵀ ΔU_k).
DenseTensor core_delta(const RhsValue& adot, const TuckerTensor& y,
                       const std::vector<DenseMatrix>& delta_factors);

/// Trace-optimization matrix for mode n:
///   B_n = ([Ȧ ×_{k≠n} U_kᵀ]_(n) − U_n Δ𝒞_(n) − U_n Σ_{k≠n}[𝒞 ×_k U_kᵀΔU_k]_(n))·𝒞_(n)ᵀ
///         + (1/h)·U_n 𝒞_(n)𝒞_(n)ᵀ + (α/h)·U_n.
/// No Gram inverse of a core unfolding appears anywhere in this assembly.
DenseMatrix assemble_Bn(int n, const RhsValue& adot, const TuckerTensor& y, const DenseTensor& delta_core,
                        const std::vector<DenseMatrix>& delta_factors, double h, double alpha);

/// Updated factor: the orthonormal polar factor of B_n, which maximizes
/// Tr[B_nᵀV] over matrices with orthonormal columns.
DenseMatrix factor_update(const DenseMatrix& bn);

/// Defect norm ‖(Δ𝒞 ×_k U_k + Σ_k 𝒞 ×_k ΔU_k ×_{ℓ≠k} U_ℓ) − Ȧ‖ evaluated in
/// expanded Gram form; never materializes the ambient tensor.
double fit_norm(const TuckerTensor& y, const TangentIncrement& delta, const RhsValue& adot);

/// Same defect evaluated densely; the oracle counterpart of fit_norm.
double fit_norm_dense(const TuckerTensor& y, const TangentIncrement& delta, const DenseTensor& adot);

/// One explicit Euler step t -> t+h realized by ALS over the factor blocks:
/// each mode subproblem is solved exactly by a small SVD, the core increment
/// is refreshed after every full sweep, and sweeping stops once the relative
/// defect ceases to improve. Returns the updated tensor (core 𝒞 + hΔ𝒞,
/// factors U_nʰ) and a per-step report.
std::pair<TuckerTensor, StepReport> als_euler_step(const TuckerTensor& y, double t, const RhsProvider& rhs,
                                                   const IntegratorConfig& cfg,
                                                   TangentIncrement* increment_out = nullptr,
                                                   const TangentIncrement* warm_start = nullptr);

/// Same step with a precomputed derivative value (used by composed schemes).
std::pair<TuckerTensor, StepReport> als_euler_step_value(const TuckerTensor& y, const RhsValue& adot,
                                                         const IntegratorConfig& cfg,
                                                         TangentIncrement* increment_out = nullptr,
                                                         const TangentIncrement* warm_start = nullptr);

/// Two-stage explicit Runge-Kutta step (improved Euler): a half step produces
/// the midpoint state, the derivative is re-evaluated there, and a full step
/// from the original state uses that derivative. Both stages run the ALS step.
std::pair<TuckerTensor, StepReport> improved_euler_step(const TuckerTensor& y, double t, const RhsProvider& rhs,
                                                        const IntegratorConfig& cfg);

/// Explicit Euler on the gauged system (the comparison baseline): factor
/// derivatives need the pseudo-inverse of the core unfolding Gram matrices and
/// fail when those are numerically singular. Factors are re-orthonormalized by
/// QR after the step with the triangular factors absorbed into the core.
TuckerTensor gauged_reference_step(const TuckerTensor& y, double t, const RhsProvider& rhs, double h);

}  // namespace dyntucker
