#include "bsdelab/quadrature.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace bsdelab {

namespace {

double fit_log_slope(const std::vector<double>& radii, const std::vector<double>& values) {
    // least squares of log I against R over the positive entries
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!(values[k] > 0.0)) continue;
        const double x = radii[k];
        const double y = std::log(values[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return 0.0;
    const double den = static_cast<double>(n) * sxx - sx * sx;
    if (den == 0.0) return 0.0;
    return (static_cast<double>(n) * sxy - sx * sy) / den;
}

bool ladder_converged(const std::vector<double>& values, double rel_tol) {
    const std::size_t k = values.size();
    if (k < 2) return false;
    const double d = std::abs(values[k - 1] - values[k - 2]);
    return d <= rel_tol * std::max(std::abs(values[k - 1]), 1e-300);
}

bool ladder_divergent(const std::vector<double>& radii, const std::vector<double>& values,
                      double rel_tol) {
    const std::size_t k = values.size();
    if (k < 3) return false;
    for (double v : values)
        if (!(v > 0.0)) return false;
    for (std::size_t j = 0; j + 1 < k; ++j)
        if (values[j + 1] <= values[j] * (1.0 + rel_tol)) return false;
    std::vector<double> slopes;
    for (std::size_t j = 0; j + 1 < k; ++j)
        slopes.push_back((std::log(values[j + 1]) - std::log(values[j])) / (radii[j + 1] - radii[j]));
    // linear or superlinear growth of log I: the slope must not collapse
    // over the last window (a geometrically decaying tail does collapse)
    const std::size_t w = std::min<std::size_t>(3, slopes.size());
    const double first = slopes[slopes.size() - w];
    const double last = slopes.back();
    return last > 0.0 && last >= 0.5 * first;
}

}  // namespace

GaussExpectation gauss_expectation(const RealFunction& g, const QuadratureOptions& opts) {
    if (!g.value && !g.log_value)
        throw std::invalid_argument("gauss_expectation: empty integrand");
    if (opts.radii.empty()) throw std::invalid_argument("gauss_expectation: need at least one radius");
    for (std::size_t k = 0; k < opts.radii.size(); ++k) {
        if (!(opts.radii[k] > 0.0) || (k > 0 && !(opts.radii[k] > opts.radii[k - 1])))
            throw std::invalid_argument("gauss_expectation: radii must be positive and ascending");
    }

    const bool log_space = static_cast<bool>(g.log_value);
    auto integrand = [&](double x) -> double {
        if (log_space) {
            const double lg = g.log_value(x);
            if (lg == -std::numeric_limits<double>::infinity()) return 0.0;
            return std::exp(lg - 0.5 * x * x - kLogSqrt2Pi);
        }
        const double v = g.value(x);
        if (!std::isfinite(v)) {
            std::ostringstream msg;
            msg << "gauss_expectation: integrand not evaluable at x=" << x
                << " and no log-space form supplied";
            throw numerical_error(msg.str());
        }
        return v * normal_pdf(x);
    };

    const double inner_rel = std::min(1e-11, 1e-3 * opts.rel_tol);

    std::vector<double> radii;
    std::vector<double> values;
    double quad_error = 0.0;
    double running = 0.0;
    double prev_radius = 0.0;
    bool overflowed = false;

    auto divergent_result = [&]() {
        GaussExpectation out;
        out.finite = false;
        out.value = std::numeric_limits<double>::infinity();
        out.error = std::numeric_limits<double>::quiet_NaN();
        out.evidence = {radii, values, fit_log_slope(radii, values)};
        return out;
    };

    auto add_radius = [&](double r) {
        // integrate the new annulus on both sides; splitting at 0 keeps the
        // frequent |x| kink on an interval boundary
        auto right = integrate_adaptive(integrand, prev_radius, r, inner_rel);
        auto left = integrate_adaptive(integrand, -r, -prev_radius, inner_rel);
        if (!std::isfinite(right.value) || !std::isfinite(left.value)) {
            // the truncated integral itself left double range
            overflowed = true;
            return;
        }
        if (!right.converged || !left.converged)
            throw numerical_error("gauss_expectation: adaptive quadrature did not converge");
        running += right.value + left.value;
        quad_error += right.error + left.error;
        radii.push_back(r);
        values.push_back(running);
        prev_radius = r;
    };

    for (double r : opts.radii) {
        add_radius(r);
        if (overflowed) break;
    }
    if (overflowed) {
        bool growing = values.size() >= 2;
        for (std::size_t k = 0; k + 1 < values.size(); ++k)
            if (!(values[k] > 0.0 && values[k + 1] > values[k])) growing = false;
        if (growing) return divergent_result();
        throw numerical_error("gauss_expectation: integrand overflow before classifiable growth");
    }
    const double spacing =
        opts.radii.size() > 1 ? opts.radii.back() - opts.radii[opts.radii.size() - 2]
                              : opts.radii.front();

    while (true) {
        if (ladder_divergent(radii, values, opts.rel_tol)) return divergent_result();
        if (ladder_converged(values, opts.rel_tol)) {
            GaussExpectation out;
            out.value = values.back();
            out.error = std::abs(values.back() - values[values.size() - 2]) + quad_error;
            out.evidence = {radii, values, fit_log_slope(radii, values)};
            return out;
        }
        if (opts.auto_extend && radii.back() + spacing <= opts.max_radius) {
            add_radius(radii.back() + spacing);
            if (overflowed) return divergent_result();
            continue;
        }
        break;
    }

    // Radius budget exhausted without a clear verdict. A geometrically
    // collapsing increment sequence still identifies a finite limit.
    const std::size_t k = values.size();
    if (k >= 3) {
        const double d1 = values[k - 1] - values[k - 2];
        const double d0 = values[k - 2] - values[k - 3];
        if (d0 > 0.0 && d1 > 0.0 && d1 < 0.95 * d0) {
            const double ratio = d1 / d0;
            const double tail = d1 * ratio / (1.0 - ratio);
            GaussExpectation out;
            out.value = values.back() + tail;
            out.error = tail + quad_error;
            out.evidence = {radii, values, fit_log_slope(radii, values)};
            return out;
        }
    }
    std::ostringstream msg;
    msg << "gauss_expectation: truncation ladder inconclusive at radius " << radii.back();
    throw numerical_error(msg.str());
}

}  // namespace bsdelab
