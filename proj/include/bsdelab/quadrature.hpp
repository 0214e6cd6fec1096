#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <queue>
#include <utility>
#include <vector>

#include "bsdelab/core.hpp"

namespace bsdelab {

struct IntegrationResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;
};

namespace detail {

// Gauss 7 / Kronrod 15 abscissae and weights on [-1, 1] (QUADPACK constants).
inline constexpr double kKronrodX[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double kKronrodW[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGaussW[4] = {0.129484966168870, 0.279705391489277,
                                      0.381830050505119, 0.417959183673469};

template <class F>
std::pair<double, double> gauss_kronrod_15(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f0 = f(mid);
    double k15 = kKronrodW[7] * f0;
    double g7 = kGaussW[3] * f0;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodX[j];
        const double fsum = f(mid + dx) + f(mid - dx);
        k15 += kKronrodW[j] * fsum;
        if (j % 2 == 1) g7 += kGaussW[j / 2] * fsum;
    }
    k15 *= half;
    g7 *= half;
    return {k15, std::abs(k15 - g7)};
}

}  // namespace detail

// Globally adaptive G7/K15 integration: the interval with the largest error
// estimate is bisected until the summed error falls below
// max(abs_tol, rel_tol * |integral|). Worst-first refinement keeps kinks and
// integrand zeros from trapping the subdivision locally.
template <class F>
IntegrationResult integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-10,
                                     double abs_tol = 0.0, std::size_t max_intervals = 20000) {
    if (!(b > a)) throw std::invalid_argument("integrate_adaptive: empty interval");
    struct Interval {
        double a, b, value, error;
        bool operator<(const Interval& o) const { return error < o.error; }
    };

    auto evaluate = [&](double lo, double hi) {
        const auto [s, err] = detail::gauss_kronrod_15(f, lo, hi);
        if (std::isnan(s)) throw numerical_error("integrate_adaptive: integrand returned NaN");
        return Interval{lo, hi, s, err};
    };

    std::priority_queue<Interval> queue;
    queue.push(evaluate(a, b));
    IntegrationResult out;
    out.evaluations = 15;
    double total_value = queue.top().value;
    double total_error = queue.top().error;

    const double min_len = 1e-14 * (b - a);
    while (total_error > std::max(abs_tol, rel_tol * std::abs(total_value))) {
        const Interval worst = queue.top();
        if (queue.size() >= max_intervals || worst.b - worst.a < min_len) {
            out.converged = false;
            break;
        }
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Interval left = evaluate(worst.a, mid);
        const Interval right = evaluate(mid, worst.b);
        out.evaluations += 30;
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
    }
    out.value = total_value;
    out.error = total_error;
    return out;
}

// Integrand for expectations against the standard normal density. When
// log_value is set it must equal log of the (nonnegative) value and is used
// to form value * density entirely in log space; this is what keeps the
// heavy terminal functionals evaluable far in the tails.
struct RealFunction {
    std::function<double(double)> value;
    std::function<double(double)> log_value;
};

struct QuadratureOptions {
    std::vector<double> radii{10.0, 20.0, 30.0, 40.0};
    double rel_tol = 1e-8;
    bool auto_extend = true;
    double max_radius = 400.0;
};

// Truncated values I_R and the least-squares slope of log I_R against R.
struct TailEvidence {
    std::vector<double> radii;
    std::vector<double> values;
    double fitted_rate = 0.0;
};

struct GaussExpectation {
    bool finite = true;
    double value = 0.0;
    double error = 0.0;
    TailEvidence evidence;
};

// E[g(X)], X standard normal, by a ladder of truncated adaptive quadratures.
// Declares FINITE when successive truncations agree within rel_tol, or when
// the remaining tail is provably collapsing geometrically; DIVERGENT when
// the truncations keep growing with a linear-or-superlinear log slope.
GaussExpectation gauss_expectation(const RealFunction& g, const QuadratureOptions& opts = {});

}  // namespace bsdelab
