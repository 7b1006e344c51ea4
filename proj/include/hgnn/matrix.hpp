#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hgnn {

/// Thrown when operand shapes are not conformable.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a caller violates an operation's contract (bad argument value,
/// wrong mode, stale state).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a computation produces NaN or Inf.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Always at least 1x1.
class Matrix {
public:
    Matrix() : Matrix(1, 1) {}
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix column(std::span<const double> values);
    static Matrix from_columns(const std::vector<Vector>& columns);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    Vector col(std::size_t c) const;
    void set_col(std::size_t c, std::span<const double> values);
    Matrix transpose() const;

    /// Shape as "RxC" for error messages.
    std::string shape_str() const;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

/// Throws NumericError naming `what` if any entry is NaN/Inf.
void check_finite(std::span<const double> values, const char* what);

Matrix matmul(const Matrix& a, const Matrix& b);
/// aᵀ·b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a·bᵀ without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, std::span<const double> x);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Matrix hadamard(const Matrix& a, const Matrix& b);
void add_inplace(Matrix& a, const Matrix& b);
/// Adds `bias` to every column.
void add_column_bias(Matrix& a, std::span<const double> bias);
/// Sum across columns, one value per row.
Vector row_sums(const Matrix& a);

double max_abs(const Matrix& a);
double frobenius_norm_sq(const Matrix& a);

Matrix relu(const Matrix& m);

/// Numerically stable softmax (max-subtracted). Empty input is a usage error.
Vector softmax_vector(std::span<const double> v);

/// Elementwise maximum over columns: entry r is max_c m(r, c).
Vector colwise_max(const Matrix& m);
/// Same as colwise_max, also returning the winning column per row
/// (first index on ties).
Vector colwise_max(const Matrix& m, std::vector<std::size_t>& argmax);

double sq_l2_distance(std::span<const double> u, std::span<const double> v);
double dot(std::span<const double> u, std::span<const double> v);
double l2_norm(std::span<const double> u);

Vector concat(std::initializer_list<std::span<const double>> parts);

}  // namespace hgnn
