// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gcdtc {

using Shape = std::vector<std::size_t>;

/// Number of elements of a tensor with the given extents.
[[nodiscard]] std::size_t numel(const Shape& shape);

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    /// Builds a matrix from nested rows, e.g. `Matrix::from_rows({{1, 2}, {3, 4}})`.
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }

    [[nodiscard]] std::span<double> values() { return data_; }
    [[nodiscard]] std::span<const double> values() const { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// N-way dense tensor.
///
/// Linearization is column-major (first index fastest):
/// offset(i) = i_1 + I_1 * (i_2 + I_2 * (i_3 + ...)), zero-based.
/// Under this layout the mode-n unfolding places multi-index i at row i_n
/// and column sum_{k != n} i_k * prod_{m < k, m != n} I_m, which is exactly the
/// ordering for which X_(n) = A^(n) * (A^(N) kr ... kr A^(1), skipping n)^T.
class DenseTensor {
public:
    DenseTensor() = default;
    explicit DenseTensor(Shape shape, double fill = 0.0);
    DenseTensor(Shape shape, std::vector<double> values);

    [[nodiscard]] const Shape& shape() const { return shape_; }
    [[nodiscard]] std::size_t order() const { return shape_.size(); }
    [[nodiscard]] std::size_t extent(std::size_t mode) const { return shape_[mode]; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }

    [[nodiscard]] std::size_t linearize(std::span<const std::size_t> index) const;
    [[nodiscard]] std::vector<std::size_t> delinearize(std::size_t offset) const;

    double& at(std::span<const std::size_t> index) { return data_[linearize(index)]; }
    [[nodiscard]] double at(std::span<const std::size_t> index) const {
        return data_[linearize(index)];
    }

    double& operator[](std::size_t offset) { return data_[offset]; }
    double operator[](std::size_t offset) const { return data_[offset]; }

    [[nodiscard]] std::span<double> values() { return data_; }
    [[nodiscard]] std::span<const double> values() const { return data_; }

    friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

/// The factor matrices A^(1..N) of a rank-R CP model; factor n is I_n x R.
class FactorSet {
public:
    FactorSet() = default;
    explicit FactorSet(std::vector<Matrix> factors);

    [[nodiscard]] std::size_t rank() const { return rank_; }
    [[nodiscard]] std::size_t order() const { return factors_.size(); }
    [[nodiscard]] Shape shape() const;

    Matrix& operator[](std::size_t mode) { return factors_[mode]; }
    const Matrix& operator[](std::size_t mode) const { return factors_[mode]; }

    [[nodiscard]] std::span<Matrix> factors() { return factors_; }
    [[nodiscard]] std::span<const Matrix> factors() const { return factors_; }

    [[nodiscard]] bool all_nonnegative() const;
    [[nodiscard]] bool all_zero() const;
    [[nodiscard]] bool all_finite() const;

    friend bool operator==(const FactorSet&, const FactorSet&) = default;

private:
    std::size_t rank_ = 0;
    std::vector<Matrix> factors_;
};

// Mode arguments below are zero-based (mode 0 is the usual 1-based mode 1).

/// Mode-n unfolding: I_n x prod_{m != n} I_m.
[[nodiscard]] Matrix unfold(const DenseTensor& t, std::size_t mode);

/// Inverse of unfold for the given target shape.
[[nodiscard]] DenseTensor fold(const Matrix& m, std::size_t mode, const Shape& shape);

[[nodiscard]] Matrix kronecker(const Matrix& a, const Matrix& b);

/// Column-wise Kronecker product; column r is a_r (x) b_r.
[[nodiscard]] Matrix khatri_rao(const Matrix& a, const Matrix& b);

/// A^(N) kr ... kr A^(n+1) kr A^(n-1) kr ... kr A^(1). Requires order >= 2.
[[nodiscard]] Matrix kr_except(const FactorSet& f, std::size_t mode);

/// Dense CP reconstruction, evaluated as fold_0(A^(0) * kr_except(f, 0)^T).
[[nodiscard]] DenseTensor reconstruct(const FactorSet& f);

/// Dense CP reconstruction through an explicit mode: fold_n(A^(n) * B^T),
/// where `b` is kr_except(f, mode).
[[nodiscard]] DenseTensor reconstruct_via(const FactorSet& f, std::size_t mode, const Matrix& b);
[[nodiscard]] DenseTensor reconstruct_via(const FactorSet& f, std::size_t mode);

/// Y_(n) * B^(n), with B^(n) = kr_except(f, mode).
[[nodiscard]] Matrix mttkrp(const DenseTensor& y, const FactorSet& f, std::size_t mode);

/// Y_(n) * b for a precomputed Khatri-Rao matrix `b`.
[[nodiscard]] Matrix mttkrp(const DenseTensor& y, std::size_t mode, const Matrix& b);

[[nodiscard]] Matrix matmul(const Matrix& a, const Matrix& b);
[[nodiscard]] Matrix transpose(const Matrix& a);

}  // namespace gcdtc
