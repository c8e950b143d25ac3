#pragma once

#include <optional>
#include <vector>

#include "dyntucker/linalg.hpp"
#include "dyntucker/tensor.hpp"

namespace dyntucker {

using RankVector = std::vector<int>;

/// Tucker representation: core of shape (r_1,...,r_d) and one I_k×r_k factor
/// per mode, each with orthonormal columns. The constructor enforces shape
/// consistency and the orthonormality invariant.
class TuckerTensor {
public:
    TuckerTensor(DenseTensor core, std::vector<DenseMatrix> factors);

    int order() const { return core_.order(); }
    const DenseTensor& core() const { return core_; }
    const std::vector<DenseMatrix>& factors() const { return factors_; }
    const DenseMatrix& factor(int k) const { return factors_[static_cast<size_t>(k)]; }

    std::vector<int> shape() const;
    RankVector ranks() const { return core_.shape(); }

    /// Frobenius norm; equals the core norm since the factors are isometries.
    double norm() const { return dyntucker::norm(core_); }

private:
    DenseTensor core_;
    std::vector<DenseMatrix> factors_;
};

/// Dense reconstruction via successive mode products.
DenseTensor to_full(const TuckerTensor& y);

/// Rotates factor k by the orthogonal q[k] and counter-rotates the core;
/// represents the same tensor. Throws if any q[k] fails the orthogonality check.
TuckerTensor gauge_rotate(const TuckerTensor& y, const std::vector<DenseMatrix>& q);

struct HooiOptions {
    double tol = 1e-8;   // relative fit change for termination
    int max_sweeps = 50;
};

struct HooiReport {
    int sweeps = 0;
    std::vector<double> fit_history;  // core norm after each sweep
};

/// Classic truncated higher-order SVD: factor k holds the leading r_k left
/// singular vectors of the mode-k unfolding.
TuckerTensor hosvd(const DenseTensor& a, const RankVector& r);

/// Higher-order orthogonal iteration with HOSVD initialization. The fit
/// (core norm) is nondecreasing across sweeps.
TuckerTensor hooi(const DenseTensor& a, const RankVector& r, const HooiOptions& opt = {},
                  HooiReport* report = nullptr);

/// Linear combination sum_i coeffs[i] * ys[i] in Tucker form: concatenated
/// factors and a block-diagonal core, re-orthonormalized with the triangular
/// factors absorbed into the core. When concatenated ranks exceed a mode size
/// the representation is exactly reduced to that mode size.
TuckerTensor tucker_sum(const std::vector<TuckerTensor>& ys, const std::vector<double>& coeffs);

/// Elementwise product. Output rank is the componentwise product of the input
/// ranks. If that would exceed a mode size, the inputs are first recompressed
/// to componentwise min(overflow_rank, mode size); without an overflow_rank
/// such a product is an error.
TuckerTensor tucker_hadamard(const TuckerTensor& y1, const TuckerTensor& y2,
                             const std::optional<RankVector>& overflow_rank = std::nullopt,
                             const HooiOptions& overflow_opt = {});

/// Kronecker-sum operator application sum_k Y ×_k K_k (each K_k square of the
/// mode size), returned as a structured Tucker sum.
TuckerTensor apply_kron_sum_operator(const std::vector<DenseMatrix>& k_ops, const TuckerTensor& y);

/// HOOI rank reduction operating directly on the Tucker representation; the
/// full dense tensor is never formed. Mode subproblems use Gram matrices and
/// contractions of the input core.
TuckerTensor recompress(const TuckerTensor& y, const RankVector& r, const HooiOptions& opt = {},
                        HooiReport* report = nullptr);

/// Leading k left singular vectors of m (completed deterministically when m
/// has fewer than k independent columns). Shared by HOSVD/HOOI paths.
DenseMatrix leading_left_vectors(const DenseMatrix& m, int k);

/// Factorization f = q*s with q orthonormal; q has min(rows, cols) columns.
/// QR when f is tall, an SVD-based reduction when f is wide.
std::pair<DenseMatrix, DenseMatrix> orthonormalize_columns(const DenseMatrix& f);

}  // namespace dyntucker
