#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace fourbar {

// Dense row-major matrix of doubles. Batches are stored one sample per
// column so the inner gemm loops run over contiguous rows.
struct Matrix {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double* row(int i) { return a.data() + static_cast<size_t>(i) * cols; }
    const double* row(int i) const { return a.data() + static_cast<size_t>(i) * cols; }
    double& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    void zero() { std::fill(a.begin(), a.end(), 0.0); }
    void resize(int r, int c) {
        rows = r;
        cols = c;
        a.assign(static_cast<size_t>(r) * c, 0.0);
    }
};

// C += A * B
inline void gemm_acc(const Matrix& A, const Matrix& B, Matrix& C) {
    assert(A.cols == B.rows && C.rows == A.rows && C.cols == B.cols);
    const int n = B.cols;
    for (int i = 0; i < A.rows; ++i) {
        double* c = C.row(i);
        const double* arow = A.row(i);
        for (int l = 0; l < A.cols; ++l) {
            const double w = arow[l];
            const double* b = B.row(l);
            for (int j = 0; j < n; ++j) c[j] += w * b[j];
        }
    }
}

// C += A^T * B
inline void gemm_tn_acc(const Matrix& A, const Matrix& B, Matrix& C) {
    assert(A.rows == B.rows && C.rows == A.cols && C.cols == B.cols);
    const int n = B.cols;
    for (int i = 0; i < A.rows; ++i) {
        const double* arow = A.row(i);
        const double* b = B.row(i);
        for (int l = 0; l < A.cols; ++l) {
            const double w = arow[l];
            double* c = C.row(l);
            for (int j = 0; j < n; ++j) c[j] += w * b[j];
        }
    }
}

// C += A * B^T
inline void gemm_nt_acc(const Matrix& A, const Matrix& B, Matrix& C) {
    assert(A.cols == B.cols && C.rows == A.rows && C.cols == B.rows);
    const int k = A.cols;
    for (int i = 0; i < A.rows; ++i) {
        const double* arow = A.row(i);
        for (int l = 0; l < B.rows; ++l) {
            const double* brow = B.row(l);
            double dot = 0;
            for (int j = 0; j < k; ++j) dot += arow[j] * brow[j];
            C.at(i, l) += dot;
        }
    }
}

} // namespace fourbar
