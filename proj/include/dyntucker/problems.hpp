#pragma once

#include <cstdint>
#include <memory>
#include <random>

#include "dyntucker/integrator.hpp"

namespace dyntucker {

/// Deterministic random source. Gaussian draws use Box-Muller on the raw
/// mt19937_64 stream so values are identical across platforms (the standard
/// library's normal_distribution is implementation-defined).
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double gaussian();

    DenseMatrix gaussian_matrix(int rows, int cols);
    DenseTensor gaussian_tensor(const std::vector<int>& shape);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Monotone-in-time evaluator of a reference trajectory; at(t) may only be
/// called with nondecreasing arguments.
class ReferenceSolution {
public:
    virtual ~ReferenceSolution() = default;
    virtual DenseTensor at(double t) = 0;
};

/// An experiment: derivative provider plus initial state and, when feasible,
/// a reference trajectory.
class Problem : public RhsProvider {
public:
    virtual std::vector<int> shape() const = 0;
    virtual TuckerTensor initial_state(const RankVector& r) const = 0;
    /// Reference trajectory, or nullptr when dense evaluation is infeasible
    /// at the requested size.
    virtual std::unique_ptr<ReferenceSolution> reference() const = 0;
};

/// Time-dependent data tensor: exp(t)·ℬ ×_k U_k plus a scaled full-rank
/// perturbation ε(1+t+sin 3t)·𝒫, with frozen random U_k, ℬ, 𝒫. d = 4.
class KochLubichProblem final : public Problem {
public:
    struct Params {
        int mode_size = 15;
        RankVector inner_rank = {10, 10, 10, 10};
        double eps = 1e-3;
    };

    KochLubichProblem(const Params& params, uint64_t seed);

    DenseTensor exact(double t) const;
    /// Direct derivative Ȧ(t) = exp(t)·ℬ×U + ε(1+3cos 3t)·𝒫.
    DenseTensor derivative_closed_form(double t) const;
    /// Same derivative written as an ODE right-hand side evaluated on the
    /// exact trajectory: A(t) + ε(3cos 3t − sin 3t − t)·𝒫.
    DenseTensor derivative_ode_form(double t) const;

    std::vector<int> shape() const override;
    TuckerTensor initial_state(const RankVector& r) const override;
    RhsValue derivative_at(double t, const TuckerTensor& y) const override;
    std::unique_ptr<ReferenceSolution> reference() const override;

private:
    Params params_;
    DenseTensor data_part_;     // ℬ ×_k U_k
    DenseTensor perturbation_;  // 𝒫
};

/// exp(t)·𝒞 ×_k exp(t W_k) with frozen random skew-symmetric W_k and a
/// superdiagonal core c_j = 2^{-(d-1)j}. The mode singular values decay
/// geometrically, which makes overestimated ranks severely ill-conditioned.
class RotatingDecayProblem final : public Problem {
public:
    struct Params {
        int dim = 2;
        int mode_size = 100;
    };

    RotatingDecayProblem(const Params& params, uint64_t seed);

    DenseTensor exact(double t) const;
    const std::vector<double>& core_diagonal() const { return diagonal_; }

    std::vector<int> shape() const override;
    TuckerTensor initial_state(const RankVector& r) const override;
    RhsValue derivative_at(double t, const TuckerTensor& y) const override;
    std::unique_ptr<ReferenceSolution> reference() const override;

private:
    Params params_;
    std::vector<DenseMatrix> skew_;
    DenseTensor core_;  // superdiagonal, dense
    std::vector<double> diagonal_;
};

/// 2d heat equation with a separable source, discretized by second-order
/// centered differences on the interior grid (FTCS time stepping is supplied
/// by the integrator). The source is exactly rank one at every time.
class HeatSourceProblem final : public Problem {
public:
    struct Params {
        int mode_size = 200;
    };
    static constexpr double kDiffusivity = 0.01;

    HeatSourceProblem(const Params& params, uint64_t seed);

    /// Largest step size for which forward Euler on the discrete diffusion
    /// operator is stable.
    double ftcs_limit() const;
    TuckerTensor source_term(double t) const;

    std::vector<int> shape() const override;
    TuckerTensor initial_state(const RankVector& r) const override;
    RhsValue derivative_at(double t, const TuckerTensor& y) const override;
    std::unique_ptr<ReferenceSolution> reference() const override;

private:
    Params params_;
    uint64_t seed_;
    DenseMatrix stencil_;       // diffusivity-scaled Laplacian factor
    std::vector<double> grid_;  // interior coordinates
    std::vector<double> bump_;  // Gaussian initial profile per mode
};

/// Reaction-diffusion u_t = 0.01 Δu + 0.1 u³ in d = 2 or 3 dimensions with a
/// rank-one Gaussian initial condition. The cubic term is two Hadamard
/// products recompressed to the rank of the current state.
class ReactionDiffusionProblem final : public Problem {
public:
    struct Params {
        int dim = 2;
        int mode_size = 400;
    };
    static constexpr double kDiffusivity = 0.01;
    static constexpr double kReactionCoeff = 0.1;

    ReactionDiffusionProblem(const Params& params, uint64_t seed);

    std::vector<int> shape() const override;
    TuckerTensor initial_state(const RankVector& r) const override;
    RhsValue derivative_at(double t, const TuckerTensor& y) const override;
    std::unique_ptr<ReferenceSolution> reference() const override;

private:
    Params params_;
    uint64_t seed_;
    DenseMatrix stencil_;
    std::vector<double> grid_;
    std::vector<double> bump_;
};

enum class ProblemKind { koch_lubich, rotating_decay, heat_source, reaction_diffusion };

struct ProblemParams {
    int dim = 2;
    int mode_size = 15;
    double eps = 1e-3;
    RankVector inner_rank = {};  // koch_lubich data ranks; defaults to all 10
};

std::unique_ptr<Problem> build_problem(ProblemKind kind, const ProblemParams& params, uint64_t seed);

/// 1/k² tridiag(1,-2,1) with k = 1/size: the Dirichlet Laplacian factor on
/// the interior grid.
DenseMatrix laplacian_stencil(int size);

/// ‖ref − Y‖ / ‖ref‖ with a dense reference.
double relative_error(const TuckerTensor& y, const DenseTensor& ref);
/// Structural variant: the difference is formed as a Tucker sum, so the full
/// tensors are never materialized.
double relative_error(const TuckerTensor& y, const TuckerTensor& ref);

}  // namespace dyntucker
