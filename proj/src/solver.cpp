// SPDX-License-Identifier: MIT
#include "gcdtc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace gcdtc {

namespace {

void check_data(const DenseTensor& t, const ObservationMask& mask) {
    if (t.shape() != mask.shape()) {
        throw std::invalid_argument("data tensor and observation mask shapes differ");
    }
    if (t.order() < 2) throw std::invalid_argument("completion needs a tensor of order >= 2");
}

bool reconstruction_is_zero(const DenseTensor& x, double epsilon) {
    return std::ranges::all_of(x.values(), [epsilon](double v) { return v - epsilon == 0.0; });
}

double relative_change(double previous, double current) {
    return std::abs(current - previous) / std::max(std::abs(previous), 1.0);
}

}  // namespace

void SolverConfig::validate(std::size_t order) const {
    if (rank == 0) throw std::invalid_argument("rank must be >= 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("alpha must be a positive finite step size");
    }
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        throw std::invalid_argument("epsilon must be finite and >= 0");
    }
    if (loss == LossKind::Poisson && epsilon <= 0.0) {
        throw std::invalid_argument("poisson loss needs epsilon > 0");
    }
    if (!(tol >= 0.0)) throw std::invalid_argument("tol must be >= 0");
    QvPrior{rho}.validate(order);
}

std::string_view to_string(Termination reason) {
    switch (reason) {
        case Termination::Converged:
            return "converged";
        case Termination::MaxSweeps:
            return "max_sweeps";
        case Termination::Collapsed:
            return "collapsed";
    }
    return "unknown";
}

FactorSet init_factors(const Shape& shape, std::size_t rank, std::uint64_t seed) {
    if (rank == 0) throw std::invalid_argument("rank must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Matrix> factors;
    factors.reserve(shape.size());
    for (std::size_t extent : shape) {
        Matrix a(extent, rank);
        // 1 - [0, 1) lands in (0, 1].
        for (double& v : a.values()) v = 1.0 - unit(rng);
        factors.push_back(std::move(a));
    }
    return FactorSet(std::move(factors));
}

DenseTensor model_tensor(const FactorSet& factors, double epsilon) {
    DenseTensor x = reconstruct(factors);
    if (epsilon != 0.0) {
        for (double& v : x.values()) v += epsilon;
    }
    return x;
}

double objective(const FactorSet& factors, const DenseTensor& t, const ObservationMask& mask,
                 const SolverConfig& cfg) {
    const DenseTensor x = model_tensor(factors, cfg.epsilon);
    return loss_value(LossModel{cfg.loss}, x, t, mask) + qv_value(factors, QvPrior{cfg.rho});
}

Matrix mode_gradient(const FactorSet& factors, std::size_t mode, const DenseTensor& t,
                     const ObservationMask& mask, const SolverConfig& cfg) {
    const Matrix b = kr_except(factors, mode);
    DenseTensor x = reconstruct_via(factors, mode, b);
    if (cfg.epsilon != 0.0) {
        for (double& v : x.values()) v += cfg.epsilon;
    }
    const DenseTensor y = build_y(LossModel{cfg.loss}, x, t, mask);
    Matrix g = mttkrp(y, mode, b);
    const double rho_n = mode < cfg.rho.size() ? cfg.rho[mode] : 0.0;
    if (rho_n != 0.0) {
        const Matrix s = qv_grad(factors[mode], rho_n);
        auto gv = g.values();
        const auto sv = s.values();
        for (std::size_t k = 0; k < gv.size(); ++k) gv[k] += sv[k];
    }
    return g;
}

SolverState start_state(FactorSet factors, const DenseTensor& t, const ObservationMask& mask,
                        const SolverConfig& cfg) {
    check_data(t, mask);
    if (factors.shape() != t.shape()) {
        throw std::invalid_argument("factor row counts do not match the data shape");
    }
    SolverState state;
    state.factors = std::move(factors);
    DenseTensor x = model_tensor(state.factors, cfg.epsilon);
    state.history.push_back(loss_value(LossModel{cfg.loss}, x, t, mask) +
                            qv_value(state.factors, QvPrior{cfg.rho}));
    state.reconstruction = std::move(x);
    return state;
}

SolverState sweep(SolverState state, const DenseTensor& t, const ObservationMask& mask,
                  const SolverConfig& cfg) {
    check_data(t, mask);
    if (state.factors.shape() != t.shape()) {
        throw std::invalid_argument("solver state does not match the data shape");
    }
    if (!(cfg.alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
    QvPrior{cfg.rho}.validate(t.order());

    for (std::size_t n = 0; n < state.factors.order(); ++n) {
        const Matrix g = mode_gradient(state.factors, n, t, mask, cfg);
        auto av = state.factors[n].values();
        const auto gv = g.values();
        for (std::size_t k = 0; k < av.size(); ++k) {
            const double next = av[k] - cfg.alpha * gv[k];
            av[k] = cfg.nonnegative ? std::max(next, 0.0) : next;
        }
    }

    DenseTensor x = model_tensor(state.factors, cfg.epsilon);
    state.history.push_back(loss_value(LossModel{cfg.loss}, x, t, mask) +
                            qv_value(state.factors, QvPrior{cfg.rho}));
    state.reconstruction = std::move(x);
    ++state.sweeps;
    return state;
}

DenseTensor complete(const DenseTensor& t, const ObservationMask& mask, const DenseTensor& x) {
    if (t.shape() != mask.shape() || t.shape() != x.shape()) {
        throw std::invalid_argument("complete: tensor and mask shapes are not congruent");
    }
    DenseTensor out = x;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (mask[i]) out[i] = t[i];
    }
    return out;
}

CompletionResult solve(const DenseTensor& t, const ObservationMask& mask,
                       const SolverConfig& cfg, const SweepObserver& observer) {
    check_data(t, mask);
    cfg.validate(t.order());
    if (mask.observed_count() == 0) {
        throw std::invalid_argument("observation mask has no observed entries");
    }

    SolverState state = start_state(init_factors(t.shape(), cfg.rank, cfg.seed), t, mask, cfg);
    Termination reason = Termination::MaxSweeps;
    while (state.sweeps < cfg.max_sweeps) {
        const std::size_t k = state.sweeps + 1;
        try {
            state = sweep(std::move(state), t, mask, cfg);
        } catch (const std::domain_error& e) {
            throw SolveError("sweep " + std::to_string(k) + ": " + e.what(), k);
        }
        if (!state.factors.all_finite() || !std::isfinite(state.history.back())) {
            throw SolveError("sweep " + std::to_string(k) + ": non-finite values encountered", k);
        }
        if (observer) observer(state);
        if (state.factors.all_zero() || reconstruction_is_zero(*state.reconstruction, cfg.epsilon)) {
            reason = Termination::Collapsed;
            break;
        }
        const auto& h = state.history;
        if (relative_change(h[h.size() - 2], h.back()) < cfg.tol) {
            reason = Termination::Converged;
            break;
        }
    }

    CompletionResult result;
    result.reconstruction = std::move(*state.reconstruction);
    result.completed = complete(t, mask, result.reconstruction);
    result.factors = std::move(state.factors);
    result.history = std::move(state.history);
    result.sweeps = state.sweeps;
    result.reason = reason;
    return result;
}

ProbeOutcome probe_alpha(const DenseTensor& t, const ObservationMask& mask,
                         const SolverConfig& cfg, std::size_t probe_sweeps) {
    SolverConfig probe = cfg;
    probe.max_sweeps = probe_sweeps;
    probe.tol = 0.0;
    ProbeOutcome out;
    try {
        CompletionResult r = solve(t, mask, probe);
        out.reason = r.reason;
        out.stable = r.reason != Termination::Collapsed && r.history.back() <= r.history.front();
        out.history = std::move(r.history);
    } catch (const SolveError&) {
        out.stable = false;
    }
    return out;
}

AlphaRampResult alpha_ramp(const DenseTensor& t, const ObservationMask& mask,
                           const SolverConfig& cfg, double ramp_factor, std::size_t probe_sweeps,
                           std::size_t max_steps) {
    if (!(ramp_factor > 1.0)) throw std::invalid_argument("ramp factor must be > 1");
    if (probe_sweeps == 0) throw std::invalid_argument("probe sweeps must be >= 1");

    AlphaRampResult result;
    SolverConfig probe = cfg;
    ++result.probes;
    if (!probe_alpha(t, mask, probe, probe_sweeps).stable) {
        throw std::runtime_error("initial alpha " + std::to_string(cfg.alpha) +
                                 " already collapses or oscillates; start from a smaller alpha");
    }
    result.alpha = cfg.alpha;
    for (std::size_t step = 0; step < max_steps; ++step) {
        probe.alpha = result.alpha * ramp_factor;
        ++result.probes;
        if (!probe_alpha(t, mask, probe, probe_sweeps).stable) {
            result.failing_alpha = probe.alpha;
            return result;
        }
        result.alpha = probe.alpha;
    }
    return result;
}

}  // namespace gcdtc
