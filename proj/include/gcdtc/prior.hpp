// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <vector>

#include "gcdtc/tensor.hpp"

namespace gcdtc {

/// Quadratic-variation smoothness prior on factor columns:
///   L2 = sum_n (rho_n / 2) sum_r sum_i (a_r^(n)(i) - a_r^(n)(i+1))^2
/// A zero weight vector is the "no prior" case.
struct QvPrior {
    std::vector<double> rho;

    /// Throws std::invalid_argument for negative weights or an order mismatch.
    void validate(std::size_t order) const;
};

[[nodiscard]] double qv_value(const FactorSet& f, const QvPrior& prior);

/// Value of the prior restricted to one factor matrix.
[[nodiscard]] double qv_mode_value(const Matrix& a, double rho_n);

/// Gradient of qv_mode_value with respect to `a`. Rows with a single
/// neighbour use the boundary difference; a one-row factor gets zeros.
[[nodiscard]] Matrix qv_grad(const Matrix& a, double rho_n);

}  // namespace gcdtc
