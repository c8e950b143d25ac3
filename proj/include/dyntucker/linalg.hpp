#pragma once

#include <cstdint>
#include <stdexcept>

#include "dyntucker/tensor.hpp"

namespace dyntucker {

/// Economy SVD b = left * diag(singular_values) * rightᵀ of a tall matrix.
/// left is rows×cols with orthonormal columns, right is cols×cols orthogonal,
/// singular values are nonnegative and sorted nonincreasing.
struct SvdResult {
    DenseMatrix left;
    std::vector<double> singular_values;
    DenseMatrix right;
};

/// Raised when a Gram matrix of a core unfolding is numerically singular.
class SingularGramError : public std::runtime_error {
public:
    explicit SingularGramError(const std::string& what) : std::runtime_error(what) {}
};

/// One-sided Jacobi SVD of b (rows >= cols required). Column rotations are
/// applied until all column pairs are orthogonal relative to their norms,
/// which preserves high relative accuracy for tiny singular values.
///
/// Determinism: fixed cyclic sweep order; each singular pair is signed so the
/// largest-magnitude entry of the left vector is positive (ties broken by
/// lowest row index); exact zero singular values get a deterministic
/// orthonormal completion on the left.
SvdResult economy_svd(const DenseMatrix& b);

/// Orthonormal polar factor Q = R·Tᵀ from the economy SVD of b; the maximizer
/// of Tr[bᵀV] over matrices with orthonormal columns. rows >= cols required.
DenseMatrix orthonormal_polar_factor(const DenseMatrix& b);

/// Cᵀ(CCᵀ)⁻¹ for a full-row-rank C. Throws SingularGramError when the Gram
/// matrix CCᵀ has condition estimate beyond 1e14 (or is exactly singular).
DenseMatrix pseudo_inverse_gram(const DenseMatrix& c);

/// Number of times pseudo_inverse_gram has been entered in this process.
/// Lets tests assert that a code path never touches the Gram inverse.
uint64_t pseudo_inverse_call_count();

/// Matrix exponential by scaling and squaring with a Taylor series summed to
/// machine precision. Intended for the moderate sizes used here (<= ~400).
DenseMatrix matrix_exponential(const DenseMatrix& w);

/// Thin Householder QR. q has orthonormal columns (also for rank-deficient
/// input), r is upper triangular with nonnegative diagonal. rows >= cols.
struct QrResult {
    DenseMatrix q;
    DenseMatrix r;
};
QrResult qr_decompose(const DenseMatrix& m);

/// Orthonormal columns spanning range(m); throws on rank deficiency.
DenseMatrix qr_orthonormalize(const DenseMatrix& m);

/// Extends m (orthonormal columns) to total_cols columns by appending
/// deterministically chosen orthonormalized unit vectors.
DenseMatrix complete_orthonormal(const DenseMatrix& m, int total_cols);

}  // namespace dyntucker
