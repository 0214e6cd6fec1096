#include "bsdelab/dual.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bsdelab/quadrature.hpp"

namespace bsdelab {

namespace {

void check_sufficiency(double lambda, double gamma, double tau) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (lambda * gamma * gamma * tau >= 1.0) {
        std::ostringstream msg;
        msg << "sufficiency condition violated: lambda * gamma^2 * (T - t) = "
            << lambda * gamma * gamma * tau << " must be below 1";
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace

BoundProcess apriori_bound(const TerminalValue& xi, const GeneratorSpec& gen, double lambda,
                           const PathEnsemble& paths, const RegressionBasis& regression_fallback) {
    const TimeGrid& grid = paths.grid();
    const double horizon = grid.horizon();
    check_sufficiency(lambda, gen.gamma(), horizon);

    const std::size_t n = grid.steps();
    const std::size_t m_count = paths.samples();

    BoundProcess bound;
    bound.grid = grid;
    bound.lambda = lambda;
    bound.values = Matrix(m_count, n + 1);

    const double psi_factor = std::exp(2.0 / lambda);
    const bool quadrature_route = xi.kind() == TerminalValue::Kind::markovian && paths.dim() == 1;
    bound.method = quadrature_route ? "state-quadrature" : "regression";

    // psi(|xi|) per sample, needed at the terminal node and for regression
    const std::vector<double> raw = xi.sample(paths);
    std::vector<double> psi_terminal(m_count);
    for (std::size_t m = 0; m < m_count; ++m) psi_terminal[m] = psi(lambda, std::abs(raw[m]));

    // conditional expectations of psi(|xi|) per node
    Matrix cond(m_count, n + 1);
    for (std::size_t m = 0; m < m_count; ++m) cond(m, n) = psi_terminal[m];

    if (quadrature_route) {
        const bool has_log = xi.has_log();
        std::vector<double> states(m_count, 0.0);  // W_{t_i}, forward
        for (std::size_t i = 0; i < n; ++i) {
            const double tau = horizon - grid.node(i);
            const double scale = std::sqrt(tau);
            for (std::size_t m = 0; m < m_count; ++m) {
                const double w = states[m];
                auto integrand = [&](double x) -> double {
                    const double v = w + scale * x;
                    if (has_log) {
                        const double lv = xi.log_abs_state(v);
                        if (lv == -std::numeric_limits<double>::infinity()) return 0.0;
                        return std::exp(log_psi_from_log(lambda, lv) - 0.5 * x * x - kLogSqrt2Pi);
                    }
                    return psi(lambda, std::abs(xi.state_value(v))) * normal_pdf(x);
                };
                cond(m, i) = integrate_adaptive(integrand, -12.0, 12.0, 1e-9).value;
                states[m] += paths.increment(m, i);
            }
        }
    } else {
        std::vector<double> states(m_count * paths.dim(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0) {
                for (std::size_t m = 0; m < m_count; ++m)
                    for (std::size_t k = 0; k < paths.dim(); ++k)
                        states[m * paths.dim() + k] += paths.increment(m, i - 1, k);
            }
            const RegressionOutput reg =
                regress(regression_fallback, paths.dim(), states, {psi_terminal});
            for (std::size_t m = 0; m < m_count; ++m) cond(m, i) = reg.fitted[0][m];
        }
    }

    for (std::size_t i = 0; i <= n; ++i) {
        const double t = grid.node(i);
        const double tau = horizon - t;
        const double discount = std::exp(gen.beta() * tau);
        const double moment = 1.0 / std::sqrt(1.0 - lambda * gen.gamma() * gen.gamma() * tau);
        const double alpha_part = gen.alpha().discounted_integral(gen.beta(), t, horizon);
        for (std::size_t m = 0; m < m_count; ++m)
            bound.values(m, i) = discount * (moment + psi_factor * cond(m, i)) + alpha_part;
    }
    return bound;
}

Estimate dual_value(const TerminalValue& xi, const ControlProcess& q, const GeneratorSpec& gen,
                    const PathEnsemble& paths) {
    const double horizon = paths.grid().horizon();
    const std::vector<double> raw = xi.sample(paths);
    std::vector<double> discounted(raw.size());
    const double growth = std::exp(gen.beta() * horizon);
    for (std::size_t m = 0; m < raw.size(); ++m) discounted[m] = growth * raw[m];
    const GirsanovWeights weights = girsanov_weights(paths, q);
    Estimate est = weighted_expectation(discounted, weights, paths.grid().steps());
    est.value += gen.alpha().discounted_integral(gen.beta(), 0.0, horizon);
    return est;
}

std::vector<double> dual_value_at(const TerminalValue& xi, const ControlProcess& q,
                                  const GeneratorSpec& gen, const PathEnsemble& paths,
                                  std::size_t node, const RegressionBasis& basis) {
    const TimeGrid& grid = paths.grid();
    const std::size_t n = grid.steps();
    if (node > n) throw std::invalid_argument("dual_value_at: node out of range");
    const double horizon = grid.horizon();
    const double t = grid.node(node);
    const double alpha_part = gen.alpha().discounted_integral(gen.beta(), t, horizon);

    const std::vector<double> raw = xi.sample(paths);
    if (node == n) return raw;

    const GirsanovWeights weights = girsanov_weights(paths, q);
    const double growth = std::exp(gen.beta() * (horizon - t));
    std::vector<double> target(raw.size());
    for (std::size_t m = 0; m < raw.size(); ++m) {
        const double reweight = std::exp(weights.log_weight(m, n) - weights.log_weight(m, node));
        target[m] = reweight * growth * raw[m];
    }

    std::vector<double> states(paths.samples() * paths.dim(), 0.0);
    for (std::size_t m = 0; m < paths.samples(); ++m)
        for (std::size_t i = 0; i < node; ++i)
            for (std::size_t k = 0; k < paths.dim(); ++k)
                states[m * paths.dim() + k] += paths.increment(m, i, k);

    const RegressionOutput reg = regress(basis, paths.dim(), states, {target});
    std::vector<double> out = reg.fitted[0];
    for (double& v : out) v += alpha_part;
    return out;
}

DualFamilyResult dual_family_max(const TerminalValue& xi, const GeneratorSpec& gen,
                                 const PathEnsemble& paths, const DualFamilyOptions& options) {
    if (paths.dim() != 1)
        throw std::invalid_argument("dual_family_max: control families are built for d=1");
    std::vector<std::pair<std::string, ControlProcess>> family;

    std::vector<double> constants = options.constant_values;
    if (constants.empty()) constants = {-gen.gamma(), gen.gamma()};
    for (double c : constants) {
        std::ostringstream tag;
        tag << "constant[q=" << c << "]";
        family.emplace_back(tag.str(), ControlProcess::constant(paths, {c}, gen.gamma()));
    }
    for (std::size_t k = 0; k < options.bang_bang_count; ++k) {
        std::ostringstream tag;
        tag << "bang-bang[" << k << "]";
        family.emplace_back(tag.str(),
                            ControlProcess::bang_bang(paths, gen.gamma(), options.bang_bang_seed + k));
    }
    if (options.feedback != nullptr) {
        const BsdeSolution& sol = *options.feedback;
        if (sol.dim != 1) throw std::invalid_argument("dual_family_max: feedback needs d=1");
        std::vector<double> values(paths.samples() * paths.grid().steps());
        for (std::size_t m = 0; m < paths.samples(); ++m)
            for (std::size_t i = 0; i < paths.grid().steps(); ++i) {
                const double sign = sol.z_at(m, i) < 0.0 ? -1.0 : 1.0;  // sgn(0) := +1
                values[m * paths.grid().steps() + i] = sign * gen.gamma();
            }
        family.emplace_back("feedback[gamma*sgn(z)]",
                            ControlProcess::from_values(paths, gen.gamma(), std::move(values)));
    }
    if (family.empty()) throw std::invalid_argument("dual_family_max: empty control family");

    DualFamilyResult result;
    bool first = true;
    for (const auto& [tag, control] : family) {
        const Estimate est = dual_value(xi, control, gen, paths);
        result.family.emplace_back(tag, est);
        if (first || est.value > result.best.value) {
            result.best = est;
            result.best_tag = tag;
            first = false;
        }
    }
    return result;
}

PhiMomentCheck phi_moment_check(double lambda, const ControlProcess& q, const PathEnsemble& paths,
                                std::size_t node) {
    const TimeGrid& grid = paths.grid();
    if (node >= grid.steps()) throw std::invalid_argument("phi_moment_check: node out of range");
    const double tau = grid.horizon() - grid.node(node);
    check_sufficiency(lambda, q.gamma(), tau);

    const std::vector<double> integral = stochastic_integral(paths, q, node);
    std::vector<double> values(integral.size());
    for (std::size_t m = 0; m < integral.size(); ++m) values[m] = phi_of_exp(lambda, integral[m]);

    PhiMomentCheck check;
    check.lhs = mean_se(values);
    check.bound = 1.0 / std::sqrt(1.0 - lambda * q.gamma() * q.gamma() * tau);
    check.pass = check.lhs.value <= check.bound + 3.0 * check.lhs.std_error;
    return check;
}

}  // namespace bsdelab
