// SPDX-License-Identifier: MIT
#include "gcdtc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gcdtc/parallel.hpp"

namespace gcdtc {

namespace {

void check_shape(const Shape& shape) {
    if (shape.empty()) throw std::invalid_argument("tensor shape must have at least one mode");
    for (std::size_t e : shape) {
        if (e == 0) throw std::invalid_argument("tensor extents must be >= 1");
    }
}

void check_mode(std::size_t mode, std::size_t order) {
    if (mode >= order) {
        throw std::out_of_range("mode " + std::to_string(mode) + " out of range for order " +
                                std::to_string(order));
    }
}

// Extents before and after `mode`: offset = p + P * (i + I * q).
struct ModeSplit {
    std::size_t before = 1;  // P
    std::size_t extent = 1;  // I
    std::size_t after = 1;   // Q
};

ModeSplit split_at(const Shape& shape, std::size_t mode) {
    ModeSplit s;
    for (std::size_t m = 0; m < mode; ++m) s.before *= shape[m];
    s.extent = shape[mode];
    for (std::size_t m = mode + 1; m < shape.size(); ++m) s.after *= shape[m];
    return s;
}

}  // namespace

std::size_t numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows * cols) {
        throw std::invalid_argument("matrix buffer length " + std::to_string(data_.size()) +
                                    " does not match " + std::to_string(rows) + "x" +
                                    std::to_string(cols));
    }
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.front().size();
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
        if (rows[i].size() != c) throw std::invalid_argument("ragged matrix rows");
        std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
}

// ----------------------------------------------------------- DenseTensor

DenseTensor::DenseTensor(Shape shape, double fill) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(numel(shape_), fill);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    check_shape(shape_);
    if (data_.size() != numel(shape_)) {
        throw std::invalid_argument("tensor buffer length " + std::to_string(data_.size()) +
                                    " does not match shape volume " +
                                    std::to_string(numel(shape_)));
    }
}

std::size_t DenseTensor::linearize(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) throw std::invalid_argument("index order mismatch");
    std::size_t offset = 0;
    for (std::size_t m = shape_.size(); m-- > 0;) {
        if (index[m] >= shape_[m]) throw std::out_of_range("tensor index out of range");
        offset = offset * shape_[m] + index[m];
    }
    return offset;
}

std::vector<std::size_t> DenseTensor::delinearize(std::size_t offset) const {
    if (offset >= data_.size()) throw std::out_of_range("tensor offset out of range");
    std::vector<std::size_t> index(shape_.size());
    for (std::size_t m = 0; m < shape_.size(); ++m) {
        index[m] = offset % shape_[m];
        offset /= shape_[m];
    }
    return index;
}

// ------------------------------------------------------------- FactorSet

FactorSet::FactorSet(std::vector<Matrix> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw std::invalid_argument("factor set needs at least one factor");
    rank_ = factors_.front().cols();
    if (rank_ == 0) throw std::invalid_argument("factor rank must be >= 1");
    for (const Matrix& a : factors_) {
        if (a.cols() != rank_) throw std::invalid_argument("factor column counts differ");
        if (a.rows() == 0) throw std::invalid_argument("factor row count must be >= 1");
    }
}

Shape FactorSet::shape() const {
    Shape s;
    s.reserve(factors_.size());
    for (const Matrix& a : factors_) s.push_back(a.rows());
    return s;
}

bool FactorSet::all_nonnegative() const {
    return std::ranges::all_of(factors_, [](const Matrix& a) {
        return std::ranges::all_of(a.values(), [](double v) { return v >= 0.0; });
    });
}

bool FactorSet::all_zero() const {
    return std::ranges::all_of(factors_, [](const Matrix& a) {
        return std::ranges::all_of(a.values(), [](double v) { return v == 0.0; });
    });
}

bool FactorSet::all_finite() const {
    return std::ranges::all_of(factors_, [](const Matrix& a) {
        return std::ranges::all_of(a.values(), [](double v) { return std::isfinite(v); });
    });
}

// ------------------------------------------------------------ Operations

Matrix unfold(const DenseTensor& t, std::size_t mode) {
    check_mode(mode, t.order());
    const ModeSplit s = split_at(t.shape(), mode);
    Matrix m(s.extent, s.before * s.after);
    const auto v = t.values();
    for (std::size_t q = 0; q < s.after; ++q) {
        for (std::size_t i = 0; i < s.extent; ++i) {
            const std::size_t base = s.before * (i + s.extent * q);
            for (std::size_t p = 0; p < s.before; ++p) m(i, p + s.before * q) = v[base + p];
        }
    }
    return m;
}

DenseTensor fold(const Matrix& m, std::size_t mode, const Shape& shape) {
    check_shape(shape);
    check_mode(mode, shape.size());
    const ModeSplit s = split_at(shape, mode);
    if (m.rows() != s.extent || m.cols() != s.before * s.after) {
        throw std::invalid_argument("fold: " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()) +
                                    " matrix does not match target shape at mode " +
                                    std::to_string(mode));
    }
    DenseTensor t(shape);
    auto v = t.values();
    for (std::size_t q = 0; q < s.after; ++q) {
        for (std::size_t i = 0; i < s.extent; ++i) {
            const std::size_t base = s.before * (i + s.extent * q);
            for (std::size_t p = 0; p < s.before; ++p) v[base + p] = m(i, p + s.before * q);
        }
    }
    return t;
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
    Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ia = 0; ia < a.rows(); ++ia) {
        for (std::size_t ja = 0; ja < a.cols(); ++ja) {
            const double s = a(ia, ja);
            for (std::size_t ib = 0; ib < b.rows(); ++ib) {
                for (std::size_t jb = 0; jb < b.cols(); ++jb) {
                    k(ia * b.rows() + ib, ja * b.cols() + jb) = s * b(ib, jb);
                }
            }
        }
    }
    return k;
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw std::invalid_argument("khatri_rao: column counts differ (" +
                                    std::to_string(a.cols()) + " vs " +
                                    std::to_string(b.cols()) + ")");
    }
    const std::size_t r = a.cols();
    Matrix k(a.rows() * b.rows(), r);
    for (std::size_t ia = 0; ia < a.rows(); ++ia) {
        const auto arow = a.row(ia);
        for (std::size_t ib = 0; ib < b.rows(); ++ib) {
            const auto brow = b.row(ib);
            auto out = k.row(ia * b.rows() + ib);
            for (std::size_t c = 0; c < r; ++c) out[c] = arow[c] * brow[c];
        }
    }
    return k;
}

Matrix kr_except(const FactorSet& f, std::size_t mode) {
    const std::size_t order = f.order();
    if (order < 2) throw std::invalid_argument("kr_except requires a factor set of order >= 2");
    check_mode(mode, order);
    Matrix acc;
    bool first = true;
    for (std::size_t m = order; m-- > 0;) {
        if (m == mode) continue;
        if (first) {
            acc = f[m];
            first = false;
        } else {
            acc = khatri_rao(acc, f[m]);
        }
    }
    return acc;
}

DenseTensor reconstruct_via(const FactorSet& f, std::size_t mode, const Matrix& b) {
    const Shape shape = f.shape();
    check_mode(mode, shape.size());
    const ModeSplit s = split_at(shape, mode);
    const Matrix& a = f[mode];
    const std::size_t r = f.rank();
    if (b.rows() != s.before * s.after || b.cols() != r) {
        throw std::invalid_argument("reconstruct: Khatri-Rao matrix has wrong dimensions");
    }
    DenseTensor x(shape);
    auto v = x.values();
    parallel_for(s.after, numel(shape) * r, [&](std::size_t q0, std::size_t q1) {
        for (std::size_t q = q0; q < q1; ++q) {
            for (std::size_t i = 0; i < s.extent; ++i) {
                const auto arow = a.row(i);
                const std::size_t base = s.before * (i + s.extent * q);
                for (std::size_t p = 0; p < s.before; ++p) {
                    const auto brow = b.row(p + s.before * q);
                    double sum = 0.0;
                    for (std::size_t c = 0; c < r; ++c) sum += arow[c] * brow[c];
                    v[base + p] = sum;
                }
            }
        }
    });
    return x;
}

DenseTensor reconstruct_via(const FactorSet& f, std::size_t mode) {
    if (f.order() == 1) {
        // A single factor is its own reconstruction: x_i = sum_r a_r(i).
        const Matrix& a = f[0];
        DenseTensor x(Shape{a.rows()});
        for (std::size_t i = 0; i < a.rows(); ++i) {
            double sum = 0.0;
            for (double v : a.row(i)) sum += v;
            x[i] = sum;
        }
        return x;
    }
    return reconstruct_via(f, mode, kr_except(f, mode));
}

DenseTensor reconstruct(const FactorSet& f) { return reconstruct_via(f, 0); }

Matrix mttkrp(const DenseTensor& y, std::size_t mode, const Matrix& b) {
    check_mode(mode, y.order());
    const ModeSplit s = split_at(y.shape(), mode);
    if (b.rows() != s.before * s.after) {
        throw std::invalid_argument("mttkrp: Khatri-Rao rows " + std::to_string(b.rows()) +
                                    " do not match unfolding columns " +
                                    std::to_string(s.before * s.after));
    }
    const std::size_t r = b.cols();
    Matrix out(s.extent, r);
    const auto v = y.values();
    parallel_for(s.extent, y.size() * r, [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            auto orow = out.row(i);
            for (std::size_t q = 0; q < s.after; ++q) {
                const std::size_t base = s.before * (i + s.extent * q);
                for (std::size_t p = 0; p < s.before; ++p) {
                    const double yv = v[base + p];
                    if (yv == 0.0) continue;
                    const auto brow = b.row(p + s.before * q);
                    for (std::size_t c = 0; c < r; ++c) orow[c] += yv * brow[c];
                }
            }
        }
    });
    return out;
}

Matrix mttkrp(const DenseTensor& y, const FactorSet& f, std::size_t mode) {
    if (y.shape() != f.shape()) throw std::invalid_argument("mttkrp: tensor/factor shape mismatch");
    return mttkrp(y, mode, kr_except(f, mode));
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto crow = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double s = a(i, k);
            const auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += s * brow[j];
        }
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    }
    return t;
}

}  // namespace gcdtc
