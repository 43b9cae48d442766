// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "gcdtc/solver.hpp"
#include "oracles.hpp"

using namespace gcdtc;
using namespace gcdtc::testing;

namespace {

ObservationMask random_mask(const Shape& shape, std::mt19937_64& rng, double p_observed) {
    std::bernoulli_distribution keep(p_observed);
    std::vector<std::uint8_t> flags(numel(shape));
    for (auto& f : flags) f = keep(rng) ? 1 : 0;
    flags[0] = 1;
    return ObservationMask(shape, std::move(flags));
}

}  // namespace

TEST_CASE("init_factors") {
    const FactorSet a = init_factors({4, 5, 3}, 3, 42);
    CHECK(a == init_factors({4, 5, 3}, 3, 42));
    CHECK_FALSE(a == init_factors({4, 5, 3}, 3, 43));
    CHECK(a.shape() == Shape{4, 5, 3});
    CHECK(a.rank() == 3);

    const FactorSet big = init_factors({1000, 1}, 100, 7);
    for (double v : big[0].values()) {
        REQUIRE(v > 0.0);
        REQUIRE(v <= 1.0);
    }
    CHECK_THROWS_AS((void)init_factors({2, 2}, 0, 0), std::invalid_argument);
}

TEST_CASE("complete") {
    const Shape s{2, 2};
    const DenseTensor t(s, std::vector<double>{7, 100, 100, 100});
    const DenseTensor x(s, std::vector<double>{1, 3, 2, 4});
    CHECK(complete(t, ObservationMask(s, true), x) == t);
    CHECK(complete(t, ObservationMask(s, false), x) == x);
    ObservationMask one(s, false);
    one.set(0, true);
    // Column-major: offsets 0..3 are (1,1), (2,1), (1,2), (2,2).
    CHECK(complete(t, one, x) == DenseTensor(s, std::vector<double>{7, 3, 2, 4}));
    CHECK_THROWS_AS((void)complete(t, one, DenseTensor(Shape{4})), std::invalid_argument);
}

TEST_CASE("objective") {
    std::mt19937_64 rng(71);
    SUBCASE("exact gaussian fit without prior is zero") {
        const FactorSet f = random_factors({3, 4, 2}, 2, rng);
        SolverConfig cfg;
        cfg.loss = LossKind::Gaussian;
        cfg.epsilon = 0.0;
        cfg.rho = {0, 0, 0};
        const DenseTensor t = reconstruct(f);
        CHECK(objective(f, t, ObservationMask(t.shape()), cfg) == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("brute-force sum over the observed set plus QV") {
        const FactorSet f = random_factors({3, 3, 2}, 2, rng, 0.1, 1.0);
        const DenseTensor t = random_tensor({3, 3, 2}, rng, 0.0, 4.0);
        const ObservationMask m = random_mask(t.shape(), rng, 0.5);
        SolverConfig cfg;
        cfg.rho = {1.5, 0.5, 2.0};
        cfg.epsilon = 1e-3;
        for (LossKind kind : {LossKind::Poisson, LossKind::Gaussian}) {
            cfg.loss = kind;
            const DenseTensor x = brute_force_cpd(f);
            double data = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (!m[i]) continue;
                const double xi = x[i] + cfg.epsilon;
                data += kind == LossKind::Poisson ? xi - t[i] * std::log(xi)
                                                  : 0.5 * (xi - t[i]) * (xi - t[i]);
            }
            double smooth = 0.0;
            for (std::size_t n = 0; n < 3; ++n)
                for (std::size_t r = 0; r < 2; ++r)
                    for (std::size_t i = 0; i + 1 < f[n].rows(); ++i) {
                        const double d = f[n](i, r) - f[n](i + 1, r);
                        smooth += 0.5 * cfg.rho[n] * d * d;
                    }
            CHECK(scalar_rel_error(objective(f, t, m, cfg), data + smooth) <= 1e-12);
            // Additivity: the data part alone is the loss on the shifted model.
            CHECK(scalar_rel_error(loss_value(LossModel{kind}, model_tensor(f, cfg.epsilon), t, m) +
                                       qv_value(f, QvPrior{cfg.rho}),
                                   objective(f, t, m, cfg)) <= 1e-14);
        }
    }
}

TEST_CASE("mode_gradient matches finite differences of the gaussian objective") {
    std::mt19937_64 rng(73);
    const Shape shape{3, 4, 2};
    FactorSet f = random_factors(shape, 2, rng);
    const DenseTensor t = random_tensor(shape, rng);
    const ObservationMask m = random_mask(shape, rng, 0.7);
    SolverConfig cfg;
    cfg.loss = LossKind::Gaussian;
    cfg.rho = {0, 0, 0};
    cfg.epsilon = 0.0;
    cfg.nonnegative = false;

    auto half_sq = [&](const FactorSet& g) {
        const DenseTensor x = brute_force_cpd(g);
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (m[i]) s += 0.5 * (x[i] - t[i]) * (x[i] - t[i]);
        return s;
    };

    for (std::size_t n = 0; n < 3; ++n) {
        const Matrix g = mode_gradient(f, n, t, m, cfg);
        for (std::size_t k = 0; k < g.size(); ++k) {
            double& entry = f[n].values()[k];
            const double saved = entry;
            const double h = 1e-6;
            entry = saved + h;
            const double up = half_sq(f);
            entry = saved - h;
            const double down = half_sq(f);
            entry = saved;
            CHECK(scalar_rel_error(g.values()[k], (up - down) / (2 * h), 1e-6) <= 1e-4);
        }
    }

    SUBCASE("a sweep steps mode 0 along that gradient") {
        cfg.alpha = 1e-3;
        const Matrix g0 = mode_gradient(f, 0, t, m, cfg);
        const SolverState next = sweep(start_state(f, t, m, cfg), t, m, cfg);
        Matrix step(f[0].rows(), f[0].cols());
        for (std::size_t k = 0; k < step.size(); ++k)
            step.values()[k] = (f[0].values()[k] - next.factors[0].values()[k]) / cfg.alpha;
        CHECK(rel_error(step, g0) <= 1e-9);
    }
}

TEST_CASE("sweep") {
    const DenseTensor t = rank1_fixture();
    const ObservationMask m(t.shape());
    SolverConfig cfg = rank1_config();

    SUBCASE("zero step leaves factors unchanged") {
        cfg.alpha = 0.0;
        const SolverState s0 = start_state(init_factors(t.shape(), 1, 0), t, m, cfg);
        const SolverState s1 = sweep(s0, t, m, cfg);
        CHECK(s1.factors == s0.factors);
        REQUIRE(s1.history.size() == 2);
        CHECK(s1.history[1] == s1.history[0]);
        CHECK(s1.sweeps == 1);
    }

    SUBCASE("projection clamps negative updates to exactly zero") {
        // t = 0 everywhere makes every mode-0 gradient entry positive. Gaussian
        // keeps the unprojected run defined once factors turn negative.
        const DenseTensor zeros(t.shape(), 0.0);
        cfg.loss = LossKind::Gaussian;
        cfg.alpha = 100.0;
        const FactorSet start = init_factors(t.shape(), 1, 0);
        const SolverState projected = sweep(start_state(start, zeros, m, cfg), zeros, m, cfg);
        CHECK(projected.factors[0] == Matrix(8, 1, 0.0));

        cfg.nonnegative = false;
        const SolverState raw = sweep(start_state(start, zeros, m, cfg), zeros, m, cfg);
        CHECK(std::ranges::all_of(raw.factors[0].values(), [](double v) { return v < 0.0; }));
    }

    SUBCASE("calibrated step decreases the objective over ten sweeps") {
        cfg.alpha = calibrate_alpha_by_halving(t, m, cfg);
        SolverState s = start_state(init_factors(t.shape(), 1, 0), t, m, cfg);
        for (int k = 0; k < 10; ++k) s = sweep(std::move(s), t, m, cfg);
        CHECK(s.history.size() == 11);
        CHECK(s.history.back() < s.history.front());
    }

    SUBCASE("shape mismatch") {
        cfg.alpha = 1e-3;
        const SolverState s = start_state(init_factors(t.shape(), 1, 0), t, m, cfg);
        const DenseTensor other(Shape{8, 8, 2});
        CHECK_THROWS_AS((void)sweep(s, other, ObservationMask(other.shape()), cfg), std::invalid_argument);
    }
}

TEST_CASE("solve") {
    SUBCASE("fully observed rank-1 matrix") {
        const DenseTensor t(Shape{2, 2}, std::vector<double>{3, 6, 4, 8});
        const ObservationMask m(t.shape());
        SolverConfig cfg = rank1_config();
        cfg.rho = {0, 0};
        cfg.max_sweeps = 5000;
        cfg.alpha = calibrate_alpha_by_halving(t, m, cfg);
        const CompletionResult r = solve(t, m, cfg);
        CHECK(r.completed == t);
        CHECK(rel_error(r.reconstruction, t) <= 1e-2);
    }

    SUBCASE("one missing entry of a rank-1 tensor") {
        const DenseTensor t = rank1_fixture();
        ObservationMask m(t.shape());
        const std::size_t hole = 100;
        m.set(hole, false);
        SolverConfig cfg = rank1_config();
        cfg.alpha = calibrate_alpha_by_halving(t, m, cfg);
        const CompletionResult r = solve(t, m, cfg);
        CHECK(std::abs(r.completed[hole] - t[hole]) <= 0.05 * t[hole]);
    }

    SUBCASE("zero sweep budget returns the initialisation") {
        const DenseTensor t = rank1_fixture();
        const ObservationMask m(t.shape());
        SolverConfig cfg = rank1_config();
        cfg.alpha = 1e-3;
        cfg.max_sweeps = 0;
        const CompletionResult r = solve(t, m, cfg);
        CHECK(r.reason == Termination::MaxSweeps);
        CHECK(r.sweeps == 0);
        CHECK(r.history.size() == 1);
        CHECK(r.factors == init_factors(t.shape(), 1, cfg.seed));
        CHECK(r.completed == t);
    }

    SUBCASE("tolerance stops early") {
        const DenseTensor t = rank1_fixture();
        const ObservationMask m(t.shape());
        SolverConfig cfg = rank1_config();
        cfg.alpha = calibrate_alpha_by_halving(t, m, cfg);
        cfg.tol = 1e-6;
        const CompletionResult r = solve(t, m, cfg);
        CHECK(r.reason == Termination::Converged);
        CHECK(r.sweeps < cfg.max_sweeps);
        const double prev = r.history[r.history.size() - 2];
        CHECK(std::abs(r.history.back() - prev) / std::max(std::abs(prev), 1.0) < cfg.tol);
    }

    SUBCASE("oversized step collapses") {
        const DenseTensor t = rank1_fixture();
        const ObservationMask m(t.shape());
        SolverConfig cfg = rank1_config();
        cfg.alpha = 10.0;
        const CompletionResult r = solve(t, m, cfg);
        CHECK(r.reason == Termination::Collapsed);
        CHECK(r.completed == t);
    }

    SUBCASE("errors") {
        const DenseTensor t = rank1_fixture();
        SolverConfig cfg = rank1_config();
        cfg.alpha = 1e-3;
        CHECK_THROWS_AS((void)solve(t, ObservationMask(t.shape(), false), cfg), std::invalid_argument);
        CHECK_THROWS_AS((void)solve(t, ObservationMask(Shape{8, 8}), cfg), std::invalid_argument);

        SolverConfig bad = cfg;
        bad.alpha = 0.0;
        CHECK_THROWS_AS((void)solve(t, ObservationMask(t.shape()), bad), std::invalid_argument);
        bad = cfg;
        bad.epsilon = 0.0;
        CHECK_THROWS_AS((void)solve(t, ObservationMask(t.shape()), bad), std::invalid_argument);
        bad = cfg;
        bad.rho = {1.0, 1.0};
        CHECK_THROWS_AS((void)solve(t, ObservationMask(t.shape()), bad), std::invalid_argument);

        // Unprojected gaussian steps with a huge alpha overflow.
        bad = cfg;
        bad.loss = LossKind::Gaussian;
        bad.nonnegative = false;
        bad.alpha = 10.0;
        try {
            (void)solve(t, ObservationMask(t.shape()), bad);
            FAIL("expected SolveError");
        } catch (const SolveError& e) {
            CHECK(e.sweep() >= 1);
            CHECK(std::string(e.what()).find("sweep") != std::string::npos);
        }
    }
}

TEST_CASE("solver contracts") {
    std::mt19937_64 rng(79);
    const DenseTensor truth = rank1_fixture();
    const ObservationMask m = random_mask(truth.shape(), rng, 0.5);
    SolverConfig cfg = rank1_config();
    cfg.rank = 2;
    cfg.rho = {1.0, 1.0, 0.0};
    cfg.max_sweeps = 60;
    cfg.alpha = calibrate_alpha_by_halving(truth, m, cfg);

    bool nonnegative = true;
    bool above_epsilon = true;
    const CompletionResult r = solve(truth, m, cfg, [&](const SolverState& s) {
        nonnegative = nonnegative && s.factors.all_nonnegative();
        above_epsilon = above_epsilon && std::ranges::all_of(s.reconstruction->values(),
                                                             [&](double v) { return v >= cfg.epsilon; });
    });
    CHECK(nonnegative);
    CHECK(above_epsilon);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (m[i]) CHECK(r.completed[i] == truth[i]);
    }

    const CompletionResult again = solve(truth, m, cfg);
    CHECK(again.completed == r.completed);
    CHECK(again.factors == r.factors);
    CHECK(again.history == r.history);
}

TEST_CASE("alpha_ramp") {
    const DenseTensor t = rank1_fixture();
    const ObservationMask m(t.shape());
    SolverConfig cfg = rank1_config();

    SUBCASE("oversized start is rejected") {
        cfg.alpha = 10.0;
        CHECK_THROWS_AS((void)alpha_ramp(t, m, cfg, 2.0, 10), std::runtime_error);
    }
    SUBCASE("ramp only increases and stops one step before failure") {
        cfg.alpha = 1e-5;
        const AlphaRampResult r = alpha_ramp(t, m, cfg, 2.0, 10);
        CHECK(r.alpha >= cfg.alpha);
        REQUIRE(r.failing_alpha.has_value());
        CHECK(*r.failing_alpha == doctest::Approx(r.alpha * 2.0));
        SolverConfig next = cfg;
        next.alpha = *r.failing_alpha;
        CHECK_FALSE(probe_alpha(t, m, next, 10).stable);
        next.alpha = r.alpha;
        CHECK(probe_alpha(t, m, next, 10).stable);
    }
    SUBCASE("step cap") {
        cfg.alpha = 1e-9;
        const AlphaRampResult r = alpha_ramp(t, m, cfg, 2.0, 5, 3);
        CHECK(r.alpha == doctest::Approx(8e-9));
        CHECK_FALSE(r.failing_alpha.has_value());
    }
    CHECK_THROWS_AS((void)alpha_ramp(t, m, cfg, 1.0, 10), std::invalid_argument);
}
