#include "hgnn/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hgnn/kernels.hpp"

namespace hgnn {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
        throw ShapeError("matrix must be at least 1x1, got " + shape_str());
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
    if (rows_ == 0 || cols_ == 0) throw ShapeError("matrix literal must be non-empty");
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ShapeError("ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::column(std::span<const double> values) {
    Matrix m(values.size(), 1);
    std::copy(values.begin(), values.end(), m.data());
    return m;
}

Matrix Matrix::from_columns(const std::vector<Vector>& columns) {
    if (columns.empty()) throw ShapeError("from_columns: no columns");
    Matrix m(columns.front().size(), columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) m.set_col(c, columns[c]);
    return m;
}

Vector Matrix::col(std::size_t c) const {
    Vector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

void Matrix::set_col(std::size_t c, std::span<const double> values) {
    if (values.size() != rows_) {
        throw ShapeError("set_col: expected " + std::to_string(rows_) + " values, got " +
                         std::to_string(values.size()));
    }
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

std::string Matrix::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void check_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw NumericError(std::string(what) + ": non-finite value");
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: " + a.shape_str() + " times " + b.shape_str());
    }
    Matrix c(a.rows(), b.cols());
    kernels::gemm_nn(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
    check_finite(c.values(), "matmul");
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw ShapeError("matmul_tn: " + a.shape_str() + "^T times " + b.shape_str());
    }
    Matrix c(a.cols(), b.cols());
    kernels::gemm_tn(a.data(), b.data(), c.data(), a.cols(), a.rows(), b.cols());
    check_finite(c.values(), "matmul_tn");
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw ShapeError("matmul_nt: " + a.shape_str() + " times " + b.shape_str() + "^T");
    }
    Matrix c(a.rows(), b.rows());
    kernels::gemm_nt(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.rows());
    check_finite(c.values(), "matmul_nt");
    return c;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) {
        throw ShapeError("matvec: " + a.shape_str() + " times vector of length " +
                         std::to_string(x.size()));
    }
    Vector y(a.rows(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < a.cols(); ++c) s += a(r, c) * x[c];
        y[r] = s;
    }
    check_finite(y, "matvec");
    return y;
}

Matrix add(const Matrix& a, const Matrix& b) {
    Matrix c = a;
    add_inplace(c, b);
    return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "sub");
    Matrix c = a;
    auto cv = c.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < cv.size(); ++i) cv[i] -= bv[i];
    check_finite(cv, "sub");
    return c;
}

Matrix scale(const Matrix& a, double s) {
    Matrix c = a;
    for (double& v : c.values()) v *= s;
    check_finite(c.values(), "scale");
    return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix c = a;
    auto cv = c.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < cv.size(); ++i) cv[i] *= bv[i];
    check_finite(cv, "hadamard");
    return c;
}

void add_inplace(Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) av[i] += bv[i];
    check_finite(av, "add");
}

void add_column_bias(Matrix& a, std::span<const double> bias) {
    if (bias.size() != a.rows()) {
        throw ShapeError("add_column_bias: bias of length " + std::to_string(bias.size()) +
                         " for " + a.shape_str());
    }
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) a(r, c) += bias[r];
}

Vector row_sums(const Matrix& a) {
    Vector s(a.rows(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) s[r] += a(r, c);
    return s;
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

double frobenius_norm_sq(const Matrix& a) {
    double s = 0.0;
    for (double v : a.values()) s += v * v;
    return s;
}

Matrix relu(const Matrix& m) {
    Matrix out = m;
    for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
    return out;
}

Vector softmax_vector(std::span<const double> v) {
    if (v.empty()) throw UsageError("softmax_vector: empty input");
    check_finite(v, "softmax_vector");
    const double mx = *std::max_element(v.begin(), v.end());
    Vector out(v.size());
    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - mx);
        total += out[i];
    }
    for (double& x : out) x /= total;
    return out;
}

Vector colwise_max(const Matrix& m) {
    std::vector<std::size_t> ignored;
    return colwise_max(m, ignored);
}

Vector colwise_max(const Matrix& m, std::vector<std::size_t>& argmax) {
    Vector out(m.rows());
    argmax.assign(m.rows(), 0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double best = m(r, 0);
        for (std::size_t c = 1; c < m.cols(); ++c) {
            if (m(r, c) > best) {
                best = m(r, c);
                argmax[r] = c;
            }
        }
        out[r] = best;
    }
    return out;
}

double sq_l2_distance(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw ShapeError("sq_l2_distance: lengths " + std::to_string(u.size()) + " and " +
                         std::to_string(v.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        s += d * d;
    }
    return s;
}

double dot(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw ShapeError("dot: lengths " + std::to_string(u.size()) + " and " +
                         std::to_string(v.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

double l2_norm(std::span<const double> u) { return std::sqrt(dot(u, u)); }

Vector concat(std::initializer_list<std::span<const double>> parts) {
    Vector out;
    for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

}  // namespace hgnn
