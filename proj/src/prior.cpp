// SPDX-License-Identifier: MIT
#include "gcdtc/prior.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gcdtc {

void QvPrior::validate(std::size_t order) const {
    if (rho.size() != order) {
        throw std::invalid_argument("rho has " + std::to_string(rho.size()) +
                                    " weights but the tensor has order " + std::to_string(order));
    }
    for (double w : rho) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("rho weights must be finite and nonnegative");
        }
    }
}

double qv_mode_value(const Matrix& a, double rho_n) {
    if (rho_n == 0.0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < a.rows(); ++i) {
        const auto cur = a.row(i);
        const auto next = a.row(i + 1);
        for (std::size_t c = 0; c < a.cols(); ++c) {
            const double d = cur[c] - next[c];
            sum += d * d;
        }
    }
    return 0.5 * rho_n * sum;
}

double qv_value(const FactorSet& f, const QvPrior& prior) {
    prior.validate(f.order());
    double sum = 0.0;
    for (std::size_t n = 0; n < f.order(); ++n) sum += qv_mode_value(f[n], prior.rho[n]);
    return sum;
}

Matrix qv_grad(const Matrix& a, double rho_n) {
    const std::size_t rows = a.rows();
    Matrix s(rows, a.cols());
    if (rows < 2 || rho_n == 0.0) return s;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        s(0, c) = rho_n * (a(0, c) - a(1, c));
        s(rows - 1, c) = rho_n * (a(rows - 1, c) - a(rows - 2, c));
        for (std::size_t j = 1; j + 1 < rows; ++j) {
            s(j, c) = rho_n * (2.0 * a(j, c) - a(j - 1, c) - a(j + 1, c));
        }
    }
    return s;
}

}  // namespace gcdtc
