// SPDX-License-Identifier: MIT
//
// Shared solver fixtures for the unit and acceptance suites.
#pragma once

#include <cstddef>
#include <vector>

#include "gcdtc/solver.hpp"

namespace gcdtc::testing {

/// Exactly rank-1, strictly positive 8x8x3 tensor with entries in [1, 11].
inline DenseTensor rank1_fixture() {
    Matrix a(8, 1), b(8, 1), c(3, 1);
    for (std::size_t i = 0; i < 8; ++i) a(i, 0) = 1.0 + 0.25 * static_cast<double>(i);
    for (std::size_t j = 0; j < 8; ++j) b(j, 0) = 2.0 - 0.1 * static_cast<double>(j);
    c(0, 0) = 1.0;
    c(1, 0) = 1.5;
    c(2, 0) = 2.0;
    return reconstruct(FactorSet({a, b, c}));
}

inline bool strictly_decreasing(const std::vector<double>& h) {
    for (std::size_t k = 1; k < h.size(); ++k)
        if (!(h[k] < h[k - 1])) return false;
    return true;
}

/// Halves alpha from `start` until `sweeps` sweeps from cfg.seed decrease the
/// objective at every step.
inline double calibrate_alpha_by_halving(const DenseTensor& t, const ObservationMask& mask,
                                         SolverConfig cfg, double start = 1e-2,
                                         std::size_t sweeps = 10) {
    cfg.alpha = start;
    for (int attempt = 0; attempt < 60; ++attempt) {
        SolverState s = start_state(init_factors(t.shape(), cfg.rank, cfg.seed), t, mask, cfg);
        bool ok = true;
        for (std::size_t k = 0; k < sweeps && ok; ++k) {
            s = sweep(std::move(s), t, mask, cfg);
            ok = s.factors.all_finite() && s.history.back() < s.history[s.history.size() - 2];
        }
        if (ok) return cfg.alpha;
        cfg.alpha *= 0.5;
    }
    return cfg.alpha;
}

/// Config for the rank-1 recovery fixture: R=1, rho=0, Poisson, projected.
inline SolverConfig rank1_config() {
    SolverConfig cfg;
    cfg.rank = 1;
    cfg.rho = {0.0, 0.0, 0.0};
    cfg.loss = LossKind::Poisson;
    cfg.epsilon = 1e-3;
    cfg.nonnegative = true;
    cfg.max_sweeps = 500;
    cfg.tol = 0.0;
    cfg.seed = 0;
    return cfg;
}

}  // namespace gcdtc::testing
