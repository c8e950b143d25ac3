#pragma once

// Shared fixtures and independent oracles for the unit tests. Everything in
// here recomputes results from first principles (index arithmetic, dense
// Kronecker products, normal equations, a standalone symmetric eigensolver)
// so the checks stay independent of the library's own code paths.

#include <cmath>
#include <random>
#include <vector>

#include "dyntucker/problems.hpp"
#include "dyntucker/tucker.hpp"

namespace oracle {

using dyntucker::DenseMatrix;
using dyntucker::DenseTensor;

inline dyntucker::Rng make_rng(uint64_t seed) { return dyntucker::Rng(seed); }

inline DenseTensor random_tensor(dyntucker::Rng& rng, const std::vector<int>& shape) {
    return rng.gaussian_tensor(shape);
}

inline DenseMatrix random_orthonormal(dyntucker::Rng& rng, int rows, int cols) {
    return dyntucker::qr_orthonormalize(rng.gaussian_matrix(rows, cols));
}

inline dyntucker::TuckerTensor random_tucker(dyntucker::Rng& rng, const std::vector<int>& shape,
                                             const std::vector<int>& ranks) {
    std::vector<DenseMatrix> factors;
    for (size_t k = 0; k < shape.size(); ++k) factors.push_back(random_orthonormal(rng, shape[k], ranks[k]));
    return {rng.gaussian_tensor(ranks), std::move(factors)};
}

// element access via explicit index arithmetic, independent of DenseTensor::offset
inline double element(const DenseTensor& x, const std::vector<int>& idx) {
    long long off = 0;
    long long stride = 1;
    for (size_t k = 0; k < idx.size(); ++k) {
        off += stride * idx[k];
        stride *= x.shape()[k];
    }
    return x[off];
}

inline bool next_index(std::vector<int>& idx, const std::vector<int>& shape) {
    for (size_t k = 0; k < idx.size(); ++k) {
        if (++idx[k] < shape[k]) return true;
        idx[k] = 0;
    }
    return false;
}

// mode-n unfolding by direct fiber enumeration
inline DenseMatrix unfold_by_enumeration(const DenseTensor& x, int mode) {
    const auto& shape = x.shape();
    const int rows = shape[mode];
    long long cols = 1;
    for (size_t k = 0; k < shape.size(); ++k)
        if (static_cast<int>(k) != mode) cols *= shape[k];

    DenseMatrix m(rows, static_cast<int>(cols));
    std::vector<int> idx(shape.size(), 0);
    do {
        long long col = 0;
        long long stride = 1;
        for (size_t k = 0; k < shape.size(); ++k) {
            if (static_cast<int>(k) == mode) continue;
            col += stride * idx[k];
            stride *= shape[k];
        }
        m(idx[mode], static_cast<int>(col)) = element(x, idx);
    } while (next_index(idx, shape));
    return m;
}

// Kronecker product (a ⊗ b)
inline DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (int ja = 0; ja < a.cols(); ++ja)
        for (int ia = 0; ia < a.rows(); ++ia)
            for (int jb = 0; jb < b.cols(); ++jb)
                for (int ib = 0; ib < b.rows(); ++ib)
                    k(ia * b.rows() + ib, ja * b.cols() + jb) = a(ia, ja) * b(ib, jb);
    return k;
}

// ⊗_{k≠n} U_k in the order U_d ⊗ ... ⊗ U_{n+1} ⊗ U_{n-1} ⊗ ... ⊗ U_1
inline DenseMatrix kron_skip(const std::vector<DenseMatrix>& u, int skip) {
    DenseMatrix acc = DenseMatrix::identity(1);
    for (size_t k = 0; k < u.size(); ++k) {
        if (static_cast<int>(k) == skip) continue;
        acc = kron(u[k], acc);
    }
    return acc;
}

// dense least squares min ||a x - b|| via normal equations + Gaussian elimination
inline std::vector<double> least_squares(const DenseMatrix& a, const std::vector<double>& b) {
    const int n = a.cols();
    DenseMatrix g = dyntucker::mat_tmul(a, a);
    std::vector<double> rhs(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double sum = 0.0;
        for (int i = 0; i < a.rows(); ++i) sum += a(i, j) * b[static_cast<size_t>(i)];
        rhs[static_cast<size_t>(j)] = sum;
    }
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int i = col + 1; i < n; ++i)
            if (std::abs(g(i, col)) > std::abs(g(pivot, col))) pivot = i;
        if (pivot != col) {
            for (int j = 0; j < n; ++j) std::swap(g(col, j), g(pivot, j));
            std::swap(rhs[static_cast<size_t>(col)], rhs[static_cast<size_t>(pivot)]);
        }
        for (int i = col + 1; i < n; ++i) {
            const double f = g(i, col) / g(col, col);
            for (int j = col; j < n; ++j) g(i, j) -= f * g(col, j);
            rhs[static_cast<size_t>(i)] -= f * rhs[static_cast<size_t>(col)];
        }
    }
    std::vector<double> x(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double sum = rhs[static_cast<size_t>(i)];
        for (int j = i + 1; j < n; ++j) sum -= g(i, j) * x[static_cast<size_t>(j)];
        x[static_cast<size_t>(i)] = sum / g(i, i);
    }
    return x;
}

// standalone cyclic Jacobi eigensolver for symmetric matrices; returns
// eigenvalues sorted nonincreasing
inline std::vector<double> symmetric_eigenvalues(DenseMatrix a) {
    const int n = a.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
            }
        }
    }
    std::vector<double> ev(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) ev[static_cast<size_t>(i)] = a(i, i);
    std::sort(ev.begin(), ev.end(), std::greater<double>());
    return ev;
}

inline double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
    double m = 0.0;
    for (long long i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

}  // namespace oracle
