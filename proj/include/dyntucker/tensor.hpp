#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dyntucker {

/// Dense matrix with column-major storage: entry (i,j) lives at data[i + rows*j].
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(int rows, int cols);                            // zero-initialized
    DenseMatrix(int rows, int cols, std::vector<double> data);  // takes ownership

    static DenseMatrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return data_[static_cast<size_t>(i) + static_cast<size_t>(rows_) * j]; }
    double operator()(int i, int j) const { return data_[static_cast<size_t>(i) + static_cast<size_t>(rows_) * j]; }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    /// Pointer to the start of column j (columns are contiguous).
    const double* col(int j) const { return data_.data() + static_cast<size_t>(rows_) * j; }
    double* col(int j) { return data_.data() + static_cast<size_t>(rows_) * j; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix mat_mul(const DenseMatrix& a, const DenseMatrix& b);    // a * b
DenseMatrix mat_tmul(const DenseMatrix& a, const DenseMatrix& b);   // aᵀ * b
DenseMatrix mat_mult(const DenseMatrix& a, const DenseMatrix& b);   // a * bᵀ
DenseMatrix mat_add(const DenseMatrix& a, const DenseMatrix& b, double beta = 1.0);  // a + beta*b
DenseMatrix mat_scale(double alpha, const DenseMatrix& a);
double mat_inner(const DenseMatrix& a, const DenseMatrix& b);       // Frobenius inner product
double mat_norm(const DenseMatrix& a);
/// Max deviation of aᵀa from the identity; 0 for perfectly orthonormal columns.
double gram_deviation(const DenseMatrix& a);
bool all_finite(const DenseMatrix& a);

/// Dense d-way tensor, d >= 2. Storage is column-major over modes:
/// the linear index of (i_1,...,i_d) is i_1 + I_1*(i_2 + I_2*(i_3 + ...)),
/// so mode-1 varies fastest.
class DenseTensor {
public:
    DenseTensor() = default;
    explicit DenseTensor(std::vector<int> shape);                       // zero-initialized
    DenseTensor(std::vector<int> shape, std::vector<double> data);

    int order() const { return static_cast<int>(shape_.size()); }
    const std::vector<int>& shape() const { return shape_; }
    int extent(int mode) const { return shape_[mode]; }
    int64_t size() const { return static_cast<int64_t>(data_.size()); }

    double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    /// Linear offset of a multi-index (bounds unchecked).
    int64_t offset(std::span<const int> idx) const;
    double at(std::span<const int> idx) const { return data_[static_cast<size_t>(offset(idx))]; }
    double& at(std::span<const int> idx) { return data_[static_cast<size_t>(offset(idx))]; }

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

/// Mode-n unfolding (0-based mode). Result has extent(n) rows; the columns
/// enumerate the remaining indices with the lowest mode varying fastest,
/// which matches the Kronecker ordering U_d ⊗ ... ⊗ U_{n+1} ⊗ U_{n-1} ⊗ ... ⊗ U_1.
DenseMatrix unfold(const DenseTensor& x, int mode);

/// Inverse of unfold for the given mode and target shape.
DenseTensor fold(const DenseMatrix& m, int mode, const std::vector<int>& shape);

/// n-mode product: replaces extent(mode) by u.rows(); [x ×_n U]_(n) = U·X_(n).
DenseTensor mode_product(const DenseTensor& x, int mode, const DenseMatrix& u);

double inner(const DenseTensor& x, const DenseTensor& y);
double norm(const DenseTensor& x);

/// Elementwise alpha*x + y.
DenseTensor axpy(double alpha, const DenseTensor& x, const DenseTensor& y);

/// Elementwise product.
DenseTensor hadamard_dense(const DenseTensor& x, const DenseTensor& y);

namespace detail {
[[noreturn]] void throw_shape_error(const std::string& what);
void check_same_shape(const DenseTensor& x, const DenseTensor& y, const char* op);
}  // namespace detail

}  // namespace dyntucker
