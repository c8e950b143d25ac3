#include "dyntucker/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace dyntucker {

namespace detail {

void throw_shape_error(const std::string& what) { throw std::invalid_argument(what); }

void check_same_shape(const DenseTensor& x, const DenseTensor& y, const char* op) {
    if (x.shape() != y.shape()) {
        throw_shape_error(std::string(op) + ": tensor shapes differ");
    }
}

}  // namespace detail

DenseMatrix::DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows <= 0 || cols <= 0) detail::throw_shape_error("DenseMatrix: dimensions must be positive");
    data_.assign(static_cast<size_t>(rows) * cols, 0.0);
}

DenseMatrix::DenseMatrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows <= 0 || cols <= 0) detail::throw_shape_error("DenseMatrix: dimensions must be positive");
    if (data_.size() != static_cast<size_t>(rows) * cols) {
        detail::throw_shape_error("DenseMatrix: data length does not match rows*cols");
    }
}

DenseMatrix DenseMatrix::identity(int n) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols(), a.rows());
    for (int j = 0; j < a.cols(); ++j)
        for (int i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
    return t;
}

// Column-major product kernel: accumulates c(:,j) += b(k,j) * a(:,k).
// Contiguous column updates keep the inner loop vectorizable.
DenseMatrix mat_mul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) detail::throw_shape_error("mat_mul: inner dimensions differ");
    DenseMatrix c(a.rows(), b.cols());
    const int m = a.rows(), k = a.cols(), n = b.cols();
    for (int j = 0; j < n; ++j) {
        double* cj = c.col(j);
        for (int l = 0; l < k; ++l) {
            const double blj = b(l, j);
            if (blj == 0.0) continue;
            const double* al = a.col(l);
            for (int i = 0; i < m; ++i) cj[i] += blj * al[i];
        }
    }
    return c;
}

DenseMatrix mat_tmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows()) detail::throw_shape_error("mat_tmul: row counts differ");
    DenseMatrix c(a.cols(), b.cols());
    const int m = a.rows();
    for (int j = 0; j < b.cols(); ++j) {
        const double* bj = b.col(j);
        for (int i = 0; i < a.cols(); ++i) {
            const double* ai = a.col(i);
            double sum = 0.0;
            for (int l = 0; l < m; ++l) sum += ai[l] * bj[l];
            c(i, j) = sum;
        }
    }
    return c;
}

DenseMatrix mat_mult(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols()) detail::throw_shape_error("mat_mult: column counts differ");
    DenseMatrix c(a.rows(), b.rows());
    const int m = a.rows(), k = a.cols(), n = b.rows();
    for (int l = 0; l < k; ++l) {
        const double* al = a.col(l);
        const double* bl = b.col(l);
        for (int j = 0; j < n; ++j) {
            const double w = bl[j];
            if (w == 0.0) continue;
            double* cj = c.col(j);
            for (int i = 0; i < m; ++i) cj[i] += w * al[i];
        }
    }
    return c;
}

DenseMatrix mat_add(const DenseMatrix& a, const DenseMatrix& b, double beta) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) detail::throw_shape_error("mat_add: shapes differ");
    DenseMatrix c = a;
    auto cd = c.data();
    auto bd = b.data();
    for (size_t i = 0; i < cd.size(); ++i) cd[i] += beta * bd[i];
    return c;
}

DenseMatrix mat_scale(double alpha, const DenseMatrix& a) {
    DenseMatrix c = a;
    for (double& v : c.data()) v *= alpha;
    return c;
}

double mat_inner(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) detail::throw_shape_error("mat_inner: shapes differ");
    double sum = 0.0;
    auto ad = a.data();
    auto bd = b.data();
    for (size_t i = 0; i < ad.size(); ++i) sum += ad[i] * bd[i];
    return sum;
}

double mat_norm(const DenseMatrix& a) { return std::sqrt(mat_inner(a, a)); }

double gram_deviation(const DenseMatrix& a) {
    double dev = 0.0;
    for (int i = 0; i < a.cols(); ++i) {
        for (int j = i; j < a.cols(); ++j) {
            double sum = 0.0;
            const double* ai = a.col(i);
            const double* aj = a.col(j);
            for (int l = 0; l < a.rows(); ++l) sum += ai[l] * aj[l];
            dev = std::max(dev, std::abs(sum - (i == j ? 1.0 : 0.0)));
        }
    }
    return dev;
}

bool all_finite(const DenseMatrix& a) {
    for (double v : a.data())
        if (!std::isfinite(v)) return false;
    return true;
}

DenseTensor::DenseTensor(std::vector<int> shape) : shape_(std::move(shape)) {
    if (shape_.size() < 2) detail::throw_shape_error("DenseTensor: order must be at least 2");
    int64_t n = 1;
    for (int s : shape_) {
        if (s <= 0) detail::throw_shape_error("DenseTensor: mode sizes must be positive");
        n *= s;
    }
    data_.assign(static_cast<size_t>(n), 0.0);
}

DenseTensor::DenseTensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_.size() < 2) detail::throw_shape_error("DenseTensor: order must be at least 2");
    int64_t n = 1;
    for (int s : shape_) {
        if (s <= 0) detail::throw_shape_error("DenseTensor: mode sizes must be positive");
        n *= s;
    }
    if (data_.size() != static_cast<size_t>(n)) {
        detail::throw_shape_error("DenseTensor: data length does not match shape");
    }
}

int64_t DenseTensor::offset(std::span<const int> idx) const {
    int64_t off = 0;
    int64_t stride = 1;
    for (size_t k = 0; k < shape_.size(); ++k) {
        off += stride * idx[k];
        stride *= shape_[k];
    }
    return off;
}

namespace {

void check_mode(const DenseTensor& x, int mode, const char* op) {
    if (mode < 0 || mode >= x.order()) {
        detail::throw_shape_error(std::string(op) + ": mode index out of range");
    }
}

}  // namespace

DenseMatrix unfold(const DenseTensor& x, int mode) {
    check_mode(x, mode, "unfold");
    const int rows = x.extent(mode);
    const int64_t cols = x.size() / rows;

    // stride of the unfolded mode in the linearization
    int64_t stride = 1;
    for (int k = 0; k < mode; ++k) stride *= x.extent(k);
    const int64_t block = stride * rows;

    DenseMatrix m(rows, static_cast<int>(cols));
    auto md = m.data();
    auto xd = x.data();
    const int64_t n = x.size();
    for (int64_t l = 0; l < n; ++l) {
        const int64_t i = (l / stride) % rows;
        const int64_t j = (l % stride) + (l / block) * stride;
        md[static_cast<size_t>(i + rows * j)] = xd[static_cast<size_t>(l)];
    }
    return m;
}

DenseTensor fold(const DenseMatrix& m, int mode, const std::vector<int>& shape) {
    DenseTensor x(shape);
    check_mode(x, mode, "fold");
    const int rows = x.extent(mode);
    const int64_t cols = x.size() / rows;
    if (m.rows() != rows || m.cols() != cols) {
        detail::throw_shape_error("fold: matrix dimensions inconsistent with shape and mode");
    }

    int64_t stride = 1;
    for (int k = 0; k < mode; ++k) stride *= x.extent(k);
    const int64_t block = stride * rows;

    auto md = m.data();
    auto xd = x.data();
    const int64_t n = x.size();
    for (int64_t l = 0; l < n; ++l) {
        const int64_t i = (l / stride) % rows;
        const int64_t j = (l % stride) + (l / block) * stride;
        xd[static_cast<size_t>(l)] = md[static_cast<size_t>(i + rows * j)];
    }
    return x;
}

DenseTensor mode_product(const DenseTensor& x, int mode, const DenseMatrix& u) {
    check_mode(x, mode, "mode_product");
    if (u.cols() != x.extent(mode)) {
        detail::throw_shape_error("mode_product: matrix columns do not match mode extent");
    }
    std::vector<int> out_shape = x.shape();
    out_shape[mode] = u.rows();
    return fold(mat_mul(u, unfold(x, mode)), mode, out_shape);
}

double inner(const DenseTensor& x, const DenseTensor& y) {
    detail::check_same_shape(x, y, "inner");
    double sum = 0.0;
    auto xd = x.data();
    auto yd = y.data();
    for (size_t i = 0; i < xd.size(); ++i) sum += xd[i] * yd[i];
    return sum;
}

double norm(const DenseTensor& x) {
    double sum = 0.0;
    for (double v : x.data()) sum += v * v;
    return std::sqrt(sum);
}

DenseTensor axpy(double alpha, const DenseTensor& x, const DenseTensor& y) {
    detail::check_same_shape(x, y, "axpy");
    DenseTensor z = y;
    auto zd = z.data();
    auto xd = x.data();
    for (size_t i = 0; i < xd.size(); ++i) zd[i] += alpha * xd[i];
    return z;
}

DenseTensor hadamard_dense(const DenseTensor& x, const DenseTensor& y) {
    detail::check_same_shape(x, y, "hadamard_dense");
    DenseTensor z = x;
    auto zd = z.data();
    auto yd = y.data();
    for (size_t i = 0; i < yd.size(); ++i) zd[i] *= yd[i];
    return z;
}

}  // namespace dyntucker
