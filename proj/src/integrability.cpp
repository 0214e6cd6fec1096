#include "bsdelab/integrability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bsdelab {

namespace {

// |xi(sqrt(T) x)| and its log as functions of the standard normal variable
struct ScaledTerminal {
    const TerminalValue& xi;
    double scale;  // sqrt(horizon)

    double abs_value(double x) const { return std::abs(xi.state_value(scale * x)); }
    double log_abs(double x) const { return xi.log_abs_state(scale * x); }
    bool has_log() const { return xi.has_log(); }
};

// Builds the RealFunction for E[h(|xi|) * extra(x)] where h and extra are
// supplied in both direct and log form.
template <class Direct, class Log>
RealFunction make_integrand(const ScaledTerminal& st, Direct direct, Log log_form) {
    RealFunction g;
    g.value = [st, direct](double x) { return direct(st.abs_value(x), x); };
    if (st.has_log()) {
        g.log_value = [st, log_form](double x) { return log_form(st.log_abs(x), x); };
    }
    return g;
}

FunctionalEstimate quadrature_entry(std::string name, const RealFunction& g,
                                    const QuadratureOptions& opts) {
    FunctionalEstimate e;
    e.name = std::move(name);
    e.method = EstimateMethod::quadrature;
    const GaussExpectation r = gauss_expectation(g, opts);
    e.finite = r.finite;
    e.estimate = r.finite ? r.value : std::numeric_limits<double>::infinity();
    e.error = r.error;
    e.evidence = r.evidence;
    return e;
}

FunctionalEstimate mc_entry(std::string name, std::span<const double> values) {
    FunctionalEstimate e;
    e.name = std::move(name);
    e.method = EstimateMethod::monte_carlo;
    const Estimate est = mean_se(values);
    e.estimate = est.value;
    e.error = est.std_error;
    // top-1% mass check
    std::vector<double> mags(values.begin(), values.end());
    for (double& v : mags) v = std::abs(v);
    std::sort(mags.begin(), mags.end(), std::greater<>());
    double total = 0.0;
    for (double v : mags) total += v;
    const std::size_t top = std::max<std::size_t>(1, mags.size() / 100);
    double head = 0.0;
    for (std::size_t i = 0; i < top; ++i) head += mags[i];
    e.unstable = total > 0.0 && head > 0.5 * total;
    return e;
}

}  // namespace

std::string psi_entry_name(double lambda) {
    std::ostringstream s;
    s << "psi[lambda=" << lambda << "]";
    return s.str();
}

std::string moment_entry_name(double p) {
    std::ostringstream s;
    s << "moment[p=" << p << "]";
    return s.str();
}

std::string log_moment_entry_name(double p) {
    std::ostringstream s;
    s << "log_moment[p=" << p << "]";
    return s.str();
}

FunctionalEstimate psi_moment(const TerminalValue& xi, double lambda, double horizon,
                              const QuadratureOptions& opts) {
    if (xi.kind() != TerminalValue::Kind::markovian)
        throw std::invalid_argument("psi_moment: needs a markovian terminal");
    if (!(horizon > 0.0)) throw std::invalid_argument("psi_moment: horizon must be positive");
    const ScaledTerminal st{xi, std::sqrt(horizon)};
    auto g = make_integrand(
        st, [lambda](double v, double) { return v > 0.0 ? psi(lambda, v) : 0.0; },
        [lambda](double lv, double) { return lv + std::sqrt(2.0 / lambda * log1p_exp(lv)); });
    return quadrature_entry(psi_entry_name(lambda), g, opts);
}

IntegrabilityReport integrability_report(const TerminalValue& xi, std::span<const double> lambdas,
                                         std::span<const double> moment_orders, double gamma,
                                         double horizon, const QuadratureOptions& opts) {
    if (xi.kind() != TerminalValue::Kind::markovian)
        throw std::invalid_argument("integrability_report: quadrature route needs a markovian terminal");
    if (!(gamma > 0.0)) throw std::invalid_argument("integrability_report: gamma must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("integrability_report: horizon must be positive");

    const ScaledTerminal st{xi, std::sqrt(horizon)};
    IntegrabilityReport report;

    for (double lambda : lambdas) {
        auto g = make_integrand(
            st, [lambda](double v, double) { return v > 0.0 ? psi(lambda, v) : 0.0; },
            [lambda](double lv, double) { return lv + std::sqrt(2.0 / lambda * log1p_exp(lv)); });
        report.entries.push_back(quadrature_entry(psi_entry_name(lambda), g, opts));
    }
    for (double p : moment_orders) {
        auto g = make_integrand(st, [p](double v, double) { return std::pow(v, p); },
                                [p](double lv, double) { return p * lv; });
        report.entries.push_back(quadrature_entry(moment_entry_name(p), g, opts));

        auto glog = make_integrand(
            st, [p](double v, double) { return v * std::pow(std::log1p(v), p); },
            [p](double lv, double) { return lv + p * std::log(log1p_exp(lv)); });
        report.entries.push_back(quadrature_entry(log_moment_entry_name(p), glog, opts));
    }

    const double gs = gamma * st.scale;  // gamma * W_T = gs * x in standard units
    auto abs_moment = make_integrand(
        st, [gs](double v, double x) { return v * std::exp(gs * std::abs(x)); },
        [gs](double lv, double x) { return lv + gs * std::abs(x); });
    report.entries.push_back(quadrature_entry(kExpAbsEntry, abs_moment, opts));

    auto plus_moment =
        make_integrand(st, [gs](double v, double x) { return v * std::exp(gs * x); },
                       [gs](double lv, double x) { return lv + gs * x; });
    report.entries.push_back(quadrature_entry(kExpPlusEntry, plus_moment, opts));

    auto minus_moment =
        make_integrand(st, [gs](double v, double x) { return v * std::exp(-gs * x); },
                       [gs](double lv, double x) { return lv - gs * x; });
    report.entries.push_back(quadrature_entry(kExpMinusEntry, minus_moment, opts));

    return report;
}

IntegrabilityReport integrability_report_mc(const TerminalValue& xi, std::span<const double> lambdas,
                                            std::span<const double> moment_orders, double gamma,
                                            const PathEnsemble& paths) {
    if (!(gamma > 0.0)) throw std::invalid_argument("integrability_report_mc: gamma must be positive");
    const std::vector<double> raw = xi.sample(paths);
    const std::vector<double> terminal = paths.dim() == 1
                                             ? paths.terminal_states()
                                             : std::vector<double>(paths.samples(), 0.0);
    const bool have_state = paths.dim() == 1;

    IntegrabilityReport report;
    std::vector<double> work(raw.size());

    for (double lambda : lambdas) {
        for (std::size_t m = 0; m < raw.size(); ++m) work[m] = psi(lambda, std::abs(raw[m]));
        report.entries.push_back(mc_entry(psi_entry_name(lambda), work));
    }
    for (double p : moment_orders) {
        for (std::size_t m = 0; m < raw.size(); ++m) work[m] = std::pow(std::abs(raw[m]), p);
        report.entries.push_back(mc_entry(moment_entry_name(p), work));
        for (std::size_t m = 0; m < raw.size(); ++m) {
            const double a = std::abs(raw[m]);
            work[m] = a * std::pow(std::log1p(a), p);
        }
        report.entries.push_back(mc_entry(log_moment_entry_name(p), work));
    }
    if (have_state) {
        for (std::size_t m = 0; m < raw.size(); ++m)
            work[m] = std::abs(raw[m]) * std::exp(gamma * std::abs(terminal[m]));
        report.entries.push_back(mc_entry(kExpAbsEntry, work));
        for (std::size_t m = 0; m < raw.size(); ++m)
            work[m] = std::abs(raw[m]) * std::exp(gamma * terminal[m]);
        report.entries.push_back(mc_entry(kExpPlusEntry, work));
        for (std::size_t m = 0; m < raw.size(); ++m)
            work[m] = std::abs(raw[m]) * std::exp(-gamma * terminal[m]);
        report.entries.push_back(mc_entry(kExpMinusEntry, work));
    }
    return report;
}

}  // namespace bsdelab
