#include <doctest.h>

#include <cmath>

#include "bsdelab/core.hpp"
#include "bsdelab/quadrature.hpp"
#include "bsdelab/terminal.hpp"

using namespace bsdelab;

namespace {

// closed form of the truncated necessity integral for the stress family:
// I_R = 2/sqrt(2 pi) [ e^{mu^2/2} (e^{(1-mu)R} - 1)/(1-mu) - int_0^R e^{x - x^2/2} dx ]
double truncated_necessity_integral(double radius, double mu) {
    const double tail = std::sqrt(2.0 * M_PI) * std::exp(0.5) *
                        (normal_cdf(radius - 1.0) - normal_cdf(-1.0));
    return 2.0 / std::sqrt(2.0 * M_PI) *
           (std::exp(0.5 * mu * mu) * (std::exp((1.0 - mu) * radius) - 1.0) / (1.0 - mu) - tail);
}

}  // namespace

TEST_CASE("adaptive kernel on smooth integrands") {
    const auto cube = integrate_adaptive([](double x) { return x * x; }, 0.0, 1.0, 1e-12);
    CHECK(cube.converged);
    CHECK(cube.value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    const auto expo = integrate_adaptive([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-12);
    CHECK(expo.value == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));

    // kink inside the interval
    const auto kink = integrate_adaptive([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, 1e-11);
    const double exact = 0.5 * (0.3 * 0.3 + 0.7 * 0.7);
    CHECK(kink.value == doctest::Approx(exact).epsilon(1e-10));

    CHECK_THROWS_AS(integrate_adaptive([](double) { return 1.0; }, 1.0, 1.0, 1e-10),
                    std::invalid_argument);
}

TEST_CASE("gaussian expectation of benign functions") {
    const GaussExpectation unit = gauss_expectation({[](double) { return 1.0; }, {}});
    CHECK(unit.finite);
    CHECK(unit.value == doctest::Approx(1.0).epsilon(1e-10));

    // MGF: E[e^X] = e^{1/2}
    const GaussExpectation mgf = gauss_expectation({[](double x) { return std::exp(x); }, {}});
    CHECK(mgf.finite);
    CHECK(mgf.value == doctest::Approx(std::exp(0.5)).epsilon(1e-9));
}

TEST_CASE("divergence detection on the stress family") {
    const double mu = 0.6;
    const TerminalValue xi = counterexample_terminal(mu);
    RealFunction g;
    g.value = [&](double x) { return xi.state_value(x) * std::exp(std::abs(x)); };
    g.log_value = [&](double x) { return xi.log_abs_state(x) + std::abs(x); };

    const GaussExpectation r = gauss_expectation(g);
    CHECK_FALSE(r.finite);
    CHECK(std::abs(r.evidence.fitted_rate - (1.0 - mu)) < 0.05);

    // engine truncations against the analytic truncated integral
    REQUIRE(r.evidence.radii.size() >= 4);
    for (std::size_t k = 0; k < 4; ++k) {
        const double oracle = truncated_necessity_integral(r.evidence.radii[k], mu);
        CHECK(r.evidence.values[k] == doctest::Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("slowly converging integrals extend the radius ladder") {
    // E[psi_4(xi)] for mu = 0.6 decays like e^{-0.1|x|}: far too slow for the
    // default radii, finite after extension
    const double mu = 0.6, lambda = 4.0;
    const TerminalValue xi = counterexample_terminal(mu);
    RealFunction g;
    g.log_value = [&](double x) {
        const double lv = xi.log_abs_state(x);
        return lv + std::sqrt(2.0 / lambda * log1p_exp(lv));
    };
    const GaussExpectation r = gauss_expectation(g);
    CHECK(r.finite);
    CHECK(r.evidence.radii.size() > 4);  // the default ladder cannot settle this one
    CHECK(r.value == doctest::Approx(5.929413447856738).epsilon(1e-6));
}

TEST_CASE("superlinear divergence is flagged") {
    RealFunction g;
    g.log_value = [](double x) { return x * x; };  // e^{x^2} against the normal density
    const GaussExpectation r = gauss_expectation(g);
    CHECK_FALSE(r.finite);
    CHECK(r.evidence.fitted_rate > 0.0);
}

TEST_CASE("overflow without a log-space form is an evaluation failure") {
    RealFunction g;
    g.value = [](double x) { return std::exp(x * x); };
    CHECK_THROWS_AS(gauss_expectation(g), numerical_error);
}

TEST_CASE("option validation") {
    RealFunction g{[](double) { return 1.0; }, {}};
    QuadratureOptions opts;
    opts.radii = {10.0, 5.0};
    CHECK_THROWS_AS(gauss_expectation(g, opts), std::invalid_argument);
    opts.radii = {};
    CHECK_THROWS_AS(gauss_expectation(g, opts), std::invalid_argument);
    CHECK_THROWS_AS(gauss_expectation(RealFunction{}), std::invalid_argument);
}
