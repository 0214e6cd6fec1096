#include <doctest.h>

#include <cmath>

#include "bsdelab/stochastic.hpp"

using namespace bsdelab;

TEST_CASE("uniform grid construction") {
    const TimeGrid g1 = build_grid(1.0, 1);
    CHECK(g1.steps() == 1);
    CHECK(g1.node(0) == 0.0);
    CHECK(g1.node(1) == 1.0);

    const TimeGrid g4 = build_grid(1.0, 4);
    REQUIRE(g4.steps() == 4);
    CHECK(g4.node(1) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(g4.node(3) == doctest::Approx(0.75).epsilon(1e-15));

    const TimeGrid g100 = build_grid(2.0, 100);
    CHECK(g100.nodes().size() == 101);
    for (std::size_t i = 0; i < 100; ++i) CHECK(g100.dt(i) == doctest::Approx(0.02).epsilon(1e-12));

    CHECK_THROWS_AS(build_grid(0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(-1.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(1.0, 0), std::invalid_argument);
}

TEST_CASE("brownian sampling is bit-identical under a fixed seed") {
    const TimeGrid grid = build_grid(1.0, 8);
    const PathEnsemble a(grid, 1, 5000, 42);
    const PathEnsemble b(grid, 1, 5000, 42);
    REQUIRE(a.increments().size() == b.increments().size());
    for (std::size_t i = 0; i < a.increments().size(); ++i)
        CHECK(a.increments()[i] == b.increments()[i]);

    const PathEnsemble c(grid, 1, 5000, 43);
    bool all_equal = true;
    for (std::size_t i = 0; i < a.increments().size(); ++i)
        if (a.increments()[i] != c.increments()[i]) all_equal = false;
    CHECK_FALSE(all_equal);
}

TEST_CASE("terminal statistics match the normal law") {
    const TimeGrid grid = build_grid(1.0, 1);
    const std::size_t m_count = 1000000;
    const PathEnsemble paths(grid, 1, m_count, 7);
    const auto wt = paths.terminal_states();
    const Estimate mean = mean_se(wt);
    CHECK(std::abs(mean.value) < 3.0 * std::sqrt(1.0 / static_cast<double>(m_count)));

    // chi-square interval: sd of the sample variance is sigma^2 sqrt(2/(M-1))
    const double variance = sample_variance(wt);
    const double var_se = std::sqrt(2.0 / (static_cast<double>(m_count) - 1.0));
    CHECK(std::abs(variance - 1.0) < 3.0 * var_se);
}

TEST_CASE("stochastic integral basics") {
    const TimeGrid grid = build_grid(1.0, 16);
    const PathEnsemble paths(grid, 1, 20000, 11);

    SUBCASE("zero integrand gives zero") {
        const ControlProcess q = ControlProcess::constant(paths, {0.0}, 1.0);
        for (double v : stochastic_integral(paths, q)) CHECK(v == 0.0);
    }

    SUBCASE("constant integrand telescopes to gamma * W_T") {
        const double gamma = 0.7;
        const ControlProcess q = ControlProcess::constant(paths, {gamma}, gamma);
        const auto integral = stochastic_integral(paths, q);
        const auto wt = paths.terminal_states();
        for (std::size_t m = 0; m < 100; ++m)
            CHECK(integral[m] == doctest::Approx(gamma * wt[m]).epsilon(1e-12));
    }

    SUBCASE("Ito isometry for constant and bang-bang controls") {
        const TimeGrid g1 = build_grid(1.0, 4);
        const std::size_t m_count = 1000000;
        const PathEnsemble big(g1, 1, m_count, 3);
        const double var_se = std::sqrt(2.0 / (static_cast<double>(m_count) - 1.0));

        const auto unit = stochastic_integral(big, ControlProcess::constant(big, {1.0}, 1.0));
        CHECK(std::abs(sample_variance(unit) - 1.0) < 3.0 * var_se);

        const auto bb = stochastic_integral(big, ControlProcess::bang_bang(big, 1.0, 99));
        CHECK(std::abs(sample_variance(bb) - 1.0) < 3.0 * var_se);
    }

    SUBCASE("bound violations are rejected") {
        CHECK_THROWS_AS(ControlProcess::constant(paths, {1.5}, 1.0), std::invalid_argument);
        std::vector<double> values(paths.samples() * paths.grid().steps(), 2.0);
        CHECK_THROWS_AS(ControlProcess::from_values(paths, 1.0, values), std::invalid_argument);
    }
}

TEST_CASE("girsanov weights") {
    const TimeGrid grid = build_grid(1.0, 8);
    const PathEnsemble paths(grid, 1, 250000, 5);

    SUBCASE("identity measure change") {
        const GirsanovWeights w = girsanov_weights(paths, ControlProcess::constant(paths, {0.0}, 1.0));
        for (std::size_t m = 0; m < 50; ++m) {
            CHECK(w.weight(m, 0) == 1.0);
            CHECK(w.weight(m, grid.steps()) == 1.0);
        }
    }

    SUBCASE("constant control: M_T = exp(W_1 - 1/2), unit mean") {
        const GirsanovWeights w = girsanov_weights(paths, ControlProcess::constant(paths, {1.0}, 1.0));
        const auto wt = paths.terminal_states();
        for (std::size_t m = 0; m < 50; ++m)
            CHECK(w.log_weight(m, grid.steps()) == doctest::Approx(wt[m] - 0.5).epsilon(1e-12));

        std::vector<double> terminal(paths.samples());
        for (std::size_t m = 0; m < paths.samples(); ++m) terminal[m] = w.weight(m, grid.steps());
        const Estimate e = mean_se(terminal);
        CHECK(std::abs(e.value - 1.0) < 3.0 * e.std_error);
    }

    SUBCASE("bang-bang martingale mean is 1, error halves when M quadruples") {
        auto terminal_weight_se = [&](std::size_t m_count) {
            const PathEnsemble p(grid, 1, m_count, 17);
            const GirsanovWeights w = girsanov_weights(p, ControlProcess::bang_bang(p, 1.0, 23));
            std::vector<double> t(m_count);
            for (std::size_t m = 0; m < m_count; ++m) t[m] = w.weight(m, grid.steps());
            return mean_se(t);
        };
        const Estimate small = terminal_weight_se(100000);
        const Estimate large = terminal_weight_se(400000);
        CHECK(std::abs(small.value - 1.0) < 3.0 * small.std_error);
        CHECK(std::abs(large.value - 1.0) < 3.0 * large.std_error);
        const double ratio = small.std_error / large.std_error;
        CHECK(ratio > 1.5);
        CHECK(ratio < 2.5);
    }
}

TEST_CASE("weighted expectation") {
    const TimeGrid grid = build_grid(1.0, 4);
    const PathEnsemble paths(grid, 1, 400000, 29);
    const std::size_t last = grid.steps();

    SUBCASE("unit weights and constant values") {
        const GirsanovWeights w = girsanov_weights(paths, ControlProcess::constant(paths, {0.0}, 1.0));
        std::vector<double> values(paths.samples(), 3.25);
        const Estimate e = weighted_expectation(values, w, last);
        CHECK(e.value == doctest::Approx(3.25).epsilon(1e-14));
        CHECK(e.std_error == doctest::Approx(0.0));
    }

    SUBCASE("drifted mean of W_1 is 1 under the tilted measure") {
        const GirsanovWeights w = girsanov_weights(paths, ControlProcess::constant(paths, {1.0}, 1.0));
        const auto values = paths.terminal_states();
        const Estimate e = weighted_expectation(values, w, last);
        CHECK(std::abs(e.value - 1.0) < 3.0 * e.std_error);
    }

    SUBCASE("exponential terminal picks up the drifted MGF e^{3/2}") {
        const GirsanovWeights w = girsanov_weights(paths, ControlProcess::constant(paths, {1.0}, 1.0));
        auto values = paths.terminal_states();
        for (double& v : values) v = std::exp(v);
        const Estimate e = weighted_expectation(values, w, last);
        CHECK(std::abs(e.value - std::exp(1.5)) < 3.0 * e.std_error);
    }

    SUBCASE("empty ensemble is rejected") {
        const GirsanovWeights w(4, 5);
        std::vector<double> none;
        CHECK_THROWS_AS(weighted_expectation(none, w, 0), std::invalid_argument);
    }
}

TEST_CASE("adaptedness survives tail resimulation") {
    const TimeGrid grid = build_grid(1.0, 10);
    const PathEnsemble paths(grid, 1, 2000, 31);
    const std::size_t cut = 6;
    const PathEnsemble resampled = paths.resample_tail(cut, 777);

    for (std::size_t m = 0; m < paths.samples(); ++m)
        for (std::size_t i = 0; i < cut; ++i)
            CHECK(paths.increment(m, i) == resampled.increment(m, i));

    auto feedback = [](std::size_t, double w) { return w >= 0.0 ? 1.0 : -1.0; };
    const ControlProcess qa = ControlProcess::state_feedback(paths, 1.0, feedback);
    const ControlProcess qb = ControlProcess::state_feedback(resampled, 1.0, feedback);
    for (std::size_t m = 0; m < paths.samples(); ++m)
        for (std::size_t i = 0; i <= cut && i < grid.steps(); ++i)
            CHECK(qa.value(m, i) == qb.value(m, i));
}
