#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mvgls {

using Vector = std::vector<double>;

/// Dense real matrix, row-major storage.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0);

    static Matrix identity(int n);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(int i, int j) { return data_[std::size_t(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[std::size_t(i) * cols_ + j]; }

    std::span<double> row(int i) { return {data_.data() + std::size_t(i) * cols_, std::size_t(cols_)}; }
    std::span<const double> row(int i) const {
        return {data_.data() + std::size_t(i) * cols_, std::size_t(cols_)};
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    Matrix transpose() const;

    Matrix& operator+=(const Matrix& rhs);
    Matrix& operator-=(const Matrix& rhs);
    Matrix& operator*=(double c);
    Matrix operator+(const Matrix& rhs) const;
    Matrix operator-(const Matrix& rhs) const;
    Matrix operator*(const Matrix& rhs) const;
    Matrix operator*(double c) const;
    Vector operator*(const Vector& v) const;

    bool operator==(const Matrix& rhs) const = default;

    double max_abs() const;
    double frobenius_norm() const;
    double trace() const;
    bool all_finite() const;

    /// Force exact symmetry by averaging with the transpose.
    void symmetrize();

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(double c, const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace mvgls
