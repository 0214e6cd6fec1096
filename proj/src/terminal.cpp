#include "bsdelab/terminal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bsdelab {

TerminalValue counterexample_terminal(double mu) {
    if (!(mu > 0.0 && mu < 1.0))
        throw std::invalid_argument("counterexample_terminal: mu must lie in (0, 1)");
    std::ostringstream name;
    name << "counterexample[mu=" << mu << "]";
    auto value = [mu](double w) {
        const double r = std::abs(w) - mu;
        return std::expm1(0.5 * r * r);
    };
    auto log_abs = [mu](double w) {
        const double u = 0.5 * (std::abs(w) - mu) * (std::abs(w) - mu);
        if (u == 0.0) return -std::numeric_limits<double>::infinity();
        return log_expm1(u);
    };
    return TerminalValue::markovian(name.str(), value, log_abs, /*nonnegative=*/true);
}

TerminalValue exp_abs_terminal(double coeff) {
    if (!(coeff >= 0.0)) throw std::invalid_argument("exp_abs_terminal: coefficient must be >= 0");
    std::ostringstream name;
    name << "exp_abs[a=" << coeff << "]";
    auto value = [coeff](double w) { return std::exp(coeff * std::abs(w)); };
    auto log_abs = [coeff](double w) { return coeff * std::abs(w); };
    return TerminalValue::markovian(name.str(), value, log_abs, /*nonnegative=*/true);
}

TerminalValue clamp_terminal(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("clamp_terminal: lo must be below hi");
    std::ostringstream name;
    name << "clamp[" << lo << "," << hi << "]";
    auto value = [lo, hi](double w) { return std::clamp(w, lo, hi); };
    return TerminalValue::markovian(name.str(), value, {}, lo >= 0.0);
}

TerminalValue identity_terminal() {
    return TerminalValue::markovian("identity", [](double w) { return w; });
}

TerminalValue constant_terminal(double c) {
    std::ostringstream name;
    name << "constant[" << c << "]";
    return TerminalValue::markovian(name.str(), [c](double) { return c; }, {}, c >= 0.0);
}

}  // namespace bsdelab
