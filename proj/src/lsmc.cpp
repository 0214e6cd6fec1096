#include "bsdelab/lsmc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bsdelab/quadrature.hpp"

namespace bsdelab {

BsdeSolution solve(const TerminalValue& xi, const GeneratorSpec& gen, const PathEnsemble& paths,
                   const RegressionBasis& basis, const SolverOptions& options) {
    const TimeGrid& grid = paths.grid();
    const std::size_t n = grid.steps();
    const std::size_t m_count = paths.samples();
    const std::size_t d = paths.dim();

    for (std::size_t i = 0; i < n; ++i) {
        if (!(gen.beta() * grid.dt(i) < 1.0))
            throw std::invalid_argument("solve: beta * dt must be below 1 (implicit step contraction)");
    }
    if (m_count < 10 * basis.size(d))
        throw std::invalid_argument("solve: need at least 10 samples per basis function");

    BsdeSolution sol;
    sol.grid = grid;
    sol.dim = d;
    sol.seed = paths.seed();
    sol.chunk_size = paths.chunk_size();
    sol.basis_description = basis.describe();
    sol.y = Matrix(m_count, n + 1);
    sol.z = Matrix(m_count, n * d);
    sol.diagnostics.resize(n);

    double terminal_se = 0.0;
    {
        const std::vector<double> terminal = xi.sample(paths);
        for (std::size_t m = 0; m < m_count; ++m) sol.y(m, n) = terminal[m];
        terminal_se = mean_se(terminal).std_error;
    }

    // running states W_{t_i}, walked backward from W_T
    std::vector<double> states(m_count * d, 0.0);
    for (std::size_t m = 0; m < m_count; ++m)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < d; ++k) states[m * d + k] += paths.increment(m, i, k);

    std::vector<double> target_y(m_count);
    std::vector<std::vector<double>> target_z(d, std::vector<double>(m_count));
    std::vector<double> z_row(d);

    for (std::size_t i = n; i-- > 0;) {
        const double dt = grid.dt(i);
        for (std::size_t m = 0; m < m_count; ++m)
            for (std::size_t k = 0; k < d; ++k) states[m * d + k] -= paths.increment(m, i, k);

        for (std::size_t m = 0; m < m_count; ++m) {
            const double ynext = sol.y(m, i + 1);
            target_y[m] = ynext;
            for (std::size_t k = 0; k < d; ++k)
                target_z[k][m] = ynext * paths.increment(m, i, k) / dt;
        }

        std::vector<std::span<const double>> targets;
        targets.emplace_back(target_y);
        for (std::size_t k = 0; k < d; ++k) targets.emplace_back(target_z[k]);
        const RegressionOutput reg = regress(basis, d, states, targets);

        NodeDiagnostics diag;
        diag.node = i;
        diag.smallest_singular_value = reg.smallest_singular_value;
        diag.ridge_used = reg.ridge_used;
        diag.degenerate_state = reg.degenerate_state;

        const double t = grid.node(i);
        for (std::size_t m = 0; m < m_count; ++m) {
            for (std::size_t k = 0; k < d; ++k) {
                const double zv = reg.fitted[1 + k][m];
                sol.z(m, i * d + k) = zv;
                z_row[k] = zv;
            }
            const double cond = reg.fitted[0][m];
            double y = cond;
            std::size_t it = 0;
            for (; it < options.max_fixed_point_iterations; ++it) {
                const double next = cond + dt * gen(t, y, z_row);
                if (std::abs(next - y) <= options.fixed_point_tol * (1.0 + std::abs(next))) {
                    y = next;
                    break;
                }
                y = next;
            }
            if (it == options.max_fixed_point_iterations) {
                std::ostringstream msg;
                msg << "solve: fixed point did not converge at node " << i << " (sample " << m << ")";
                throw numerical_error(msg.str());
            }
            diag.max_fixed_point_iterations = std::max(diag.max_fixed_point_iterations, it + 1);
            sol.y(m, i) = y;
        }
        sol.diagnostics[i] = diag;
    }

    // The first node is degenerate (all paths at the origin), so every sample
    // carries the same value there. Mean preservation of the regressions
    // makes the estimator fluctuate like the raw terminal mean, so the
    // terminal spread sets the error scale.
    sol.y0.value = sol.y(0, 0);
    {
        std::vector<double> next(m_count);
        for (std::size_t m = 0; m < m_count; ++m) next[m] = sol.y(m, 1);
        const Estimate e = mean_se(next);
        sol.y0.std_error =
            std::max(std::exp(gen.beta() * grid.horizon()) * terminal_se,
                     e.std_error / (1.0 - gen.beta() * grid.dt(0)));
    }
    return sol;
}

ClosedFormOracle::ClosedFormOracle(const TerminalValue& xi, const GeneratorSpec& gen, double horizon)
    : xi_(xi), beta_(gen.beta()), gamma_(gen.gamma()), alpha_(gen.alpha()), horizon_(horizon) {
    if (xi.kind() != TerminalValue::Kind::markovian)
        throw std::invalid_argument("ClosedFormOracle: terminal must be markovian");
    if (!(horizon > 0.0)) throw std::invalid_argument("ClosedFormOracle: horizon must be positive");
    // the oracle is only valid for nondecreasing terminals; reject otherwise
    double prev = xi.state_value(-12.0);
    for (int k = 1; k <= 4800; ++k) {
        const double w = -12.0 + k * (24.0 / 4800.0);
        const double cur = xi.state_value(w);
        if (cur < prev - 1e-12 * (1.0 + std::abs(prev)))
            throw std::invalid_argument("ClosedFormOracle: terminal is not monotone nondecreasing");
        prev = cur;
    }
}

double ClosedFormOracle::operator()(double t, double w) const {
    if (t < 0.0 || t > horizon_) throw std::invalid_argument("ClosedFormOracle: time out of range");
    const double tau = horizon_ - t;
    if (tau == 0.0) return xi_.state_value(w);
    const double shift = w + gamma_ * tau;
    const double scale = std::sqrt(tau);
    auto f = [&](double x) { return xi_.state_value(shift + scale * x) * normal_pdf(x); };
    const double expectation = integrate_adaptive(f, -12.0, 12.0, 1e-11).value;
    return std::exp(beta_ * tau) * expectation + alpha_.discounted_integral(beta_, t, horizon_);
}

ComparisonReport comparison_check(const BsdeSolution& a, const BsdeSolution& b, double tol) {
    if (!(a.grid == b.grid) || a.dim != b.dim || a.y.rows() != b.y.rows() || a.seed != b.seed ||
        a.chunk_size != b.chunk_size)
        throw std::invalid_argument("comparison_check: solutions come from different ensembles");
    ComparisonReport rep;
    rep.total = a.y.rows() * a.y.cols();
    for (std::size_t m = 0; m < a.y.rows(); ++m) {
        for (std::size_t i = 0; i < a.y.cols(); ++i) {
            const double excess = a.y(m, i) - b.y(m, i);
            if (excess > tol) {
                ++rep.violations;
                rep.max_excess = std::max(rep.max_excess, excess);
            }
        }
    }
    rep.fraction = static_cast<double>(rep.violations) / static_cast<double>(rep.total);
    rep.pass = rep.fraction < 1e-3;
    return rep;
}

double sp_norm(const BsdeSolution& sol, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("sp_norm: p must be >= 1");
    double acc = 0.0;
    for (std::size_t m = 0; m < sol.y.rows(); ++m) {
        double sup = 0.0;
        for (std::size_t i = 0; i < sol.y.cols(); ++i) sup = std::max(sup, std::abs(sol.y(m, i)));
        acc += std::pow(sup, p);
    }
    return std::pow(acc / static_cast<double>(sol.y.rows()), 1.0 / p);
}

double mp_norm(const BsdeSolution& sol, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("mp_norm: p must be >= 1");
    const std::size_t n = sol.grid.steps();
    double acc = 0.0;
    for (std::size_t m = 0; m < sol.y.rows(); ++m) {
        double quad = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z2 = 0.0;
            for (std::size_t k = 0; k < sol.dim; ++k) {
                const double zv = sol.z_at(m, i, k);
                z2 += zv * zv;
            }
            quad += z2 * sol.grid.dt(i);
        }
        acc += std::pow(quad, 0.5 * p);
    }
    return std::pow(acc / static_cast<double>(sol.y.rows()), 1.0 / p);
}

}  // namespace bsdelab
