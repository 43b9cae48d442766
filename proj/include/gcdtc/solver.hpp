// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "gcdtc/loss.hpp"
#include "gcdtc/prior.hpp"
#include "gcdtc/tensor.hpp"

namespace gcdtc {

/// Parameters of the block-coordinate-descent completion loop.
///
/// Defaults mirror the image setting: rank 300, rho = (10, 10, 0),
/// epsilon = 1e-3, Poisson loss with projected (nonnegative) updates.
/// `alpha` has no usable default and must be set (or found by alpha_ramp).
struct SolverConfig {
    std::size_t rank = 300;
    double alpha = 0.0;
    /// Added to every reconstructed entry before the loss sees it.
    double epsilon = 1e-3;
    std::vector<double> rho = {10.0, 10.0, 0.0};
    LossKind loss = LossKind::Poisson;
    bool nonnegative = true;
    std::size_t max_sweeps = 500;
    /// Stop once |f_k - f_{k-1}| / max(|f_{k-1}|, 1) < tol.
    double tol = 1e-6;
    std::uint64_t seed = 0;

    /// Checks the invariants a full solve needs (alpha > 0 among them).
    void validate(std::size_t order) const;
};

struct SolverState {
    FactorSet factors;
    std::size_t sweeps = 0;
    /// Objective after initialisation and after each completed sweep.
    std::vector<double> history;
    /// Reconstruction (epsilon included) for the current factors.
    std::optional<DenseTensor> reconstruction;
};

enum class Termination { Converged, MaxSweeps, Collapsed };

[[nodiscard]] std::string_view to_string(Termination reason);

struct CompletionResult {
    DenseTensor completed;
    DenseTensor reconstruction;
    FactorSet factors;
    std::vector<double> history;
    std::size_t sweeps = 0;
    Termination reason = Termination::MaxSweeps;
};

/// Raised when a solve produces non-finite values or leaves the loss domain.
class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, std::size_t sweep)
        : std::runtime_error(what), sweep_(sweep) {}
    [[nodiscard]] std::size_t sweep() const { return sweep_; }

private:
    std::size_t sweep_;
};

/// Called after each completed sweep.
using SweepObserver = std::function<void(const SolverState&)>;

/// Factors with entries drawn uniformly from (0, 1], deterministic per seed.
[[nodiscard]] FactorSet init_factors(const Shape& shape, std::size_t rank, std::uint64_t seed);

/// reconstruct(factors) + epsilon.
[[nodiscard]] DenseTensor model_tensor(const FactorSet& factors, double epsilon);

/// Loss over observed entries of model_tensor(factors) plus the QV prior.
[[nodiscard]] double objective(const FactorSet& factors, const DenseTensor& t,
                               const ObservationMask& mask, const SolverConfig& cfg);

/// Search direction G^(n) = Y_(n) B^(n) + S^(n) for the current factors.
[[nodiscard]] Matrix mode_gradient(const FactorSet& factors, std::size_t mode,
                                   const DenseTensor& t, const ObservationMask& mask,
                                   const SolverConfig& cfg);

/// Wraps factors in a state whose history holds the initial objective.
[[nodiscard]] SolverState start_state(FactorSet factors, const DenseTensor& t,
                                      const ObservationMask& mask, const SolverConfig& cfg);

/// One pass of per-mode gradient steps over modes 0..N-1, followed by an
/// objective evaluation appended to the history. Accepts alpha == 0.
[[nodiscard]] SolverState sweep(SolverState state, const DenseTensor& t,
                                const ObservationMask& mask, const SolverConfig& cfg);

/// Observed entries from `t`, everything else from `x`.
[[nodiscard]] DenseTensor complete(const DenseTensor& t, const ObservationMask& mask,
                                   const DenseTensor& x);

[[nodiscard]] CompletionResult solve(const DenseTensor& t, const ObservationMask& mask,
                                     const SolverConfig& cfg,
                                     const SweepObserver& observer = {});

struct AlphaRampResult {
    /// Last step size whose probe run stayed stable.
    double alpha = 0.0;
    /// First step size that failed, if the ramp reached one within max_steps.
    std::optional<double> failing_alpha;
    std::size_t probes = 0;
};

/// Outcome of a fixed-length probe run used by alpha_ramp.
struct ProbeOutcome {
    bool stable = false;
    std::vector<double> history;
    std::optional<Termination> reason;
};

/// Runs `probe_sweeps` sweeps at cfg.alpha from cfg.seed. Unstable means the
/// model collapsed, hit a non-finite value, or ended above its start.
[[nodiscard]] ProbeOutcome probe_alpha(const DenseTensor& t, const ObservationMask& mask,
                                       const SolverConfig& cfg, std::size_t probe_sweeps);

/// Multiplies alpha by `ramp_factor` until a probe fails and returns the
/// last stable value. Throws std::runtime_error if cfg.alpha already fails.
[[nodiscard]] AlphaRampResult alpha_ramp(const DenseTensor& t, const ObservationMask& mask,
                                         const SolverConfig& cfg, double ramp_factor,
                                         std::size_t probe_sweeps, std::size_t max_steps = 64);

}  // namespace gcdtc
