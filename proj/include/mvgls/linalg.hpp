#pragma once

#include "mvgls/matrix.hpp"

namespace mvgls {

/// Lower-triangular factor L of a symmetric positive-definite A, A = L L'.
class SpdFactor {
public:
    explicit SpdFactor(Matrix lower);

    int dim() const { return L_.rows(); }
    const Matrix& lower() const { return L_; }

    Vector solve(const Vector& b) const;   // A x = b
    Matrix solve(const Matrix& b) const;   // A X = B, column by column
    Matrix forward_solve(const Matrix& b) const;  // L X = B
    Matrix inverse() const;
    double log_det() const;  // log det A

private:
    Matrix L_;
};

/// Cholesky factorization. Throws NotPositiveDefinite when a pivot falls at or
/// below 1e-12 relative to the matrix scale.
SpdFactor cholesky(const Matrix& a);

struct SymEigen {
    Vector values;   // descending
    Matrix vectors;  // orthonormal columns, A = V diag(values) V'
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymEigen sym_eigen(const Matrix& a);

/// Symmetric square root Q L^{+-1/2} Q' of a symmetric PSD matrix.
Matrix psd_sqrt(const Matrix& a, bool inverse = false);

/// Largest eigenvalue modulus of a square matrix, via Hessenberg reduction
/// and double-shift QR (eigenvalues only).
double spectral_radius(const Matrix& a);

Matrix kron(const Matrix& a, const Matrix& b);

/// Column-major stacking: vec(A)[j*rows + i] = A(i, j).
Vector vec(const Matrix& a);

/// General square solve via LU with partial pivoting.
Vector lu_solve(Matrix a, Vector b);

}  // namespace mvgls
