#pragma once

#include <functional>
#include <string>
#include <utility>

#include "bsdelab/core.hpp"
#include "bsdelab/stochastic.hpp"

namespace bsdelab {

// Terminal functional of a path. Markovian terminals are functions of the
// scalar terminal state W_T (d = 1) and may carry a log-space form of |g|
// so the integrability machinery can evaluate them far in the tails;
// path-dependent terminals see the whole ensemble row.
class TerminalValue {
public:
    enum class Kind { markovian, pathwise };

    using StateFn = std::function<double(double)>;
    using PathFn = std::function<double(const PathEnsemble&, std::size_t)>;

    static TerminalValue markovian(std::string description, StateFn value, StateFn log_abs = {},
                                   bool nonnegative = false) {
        TerminalValue t;
        t.kind_ = Kind::markovian;
        t.description_ = std::move(description);
        t.state_value_ = std::move(value);
        t.log_abs_ = std::move(log_abs);
        t.nonnegative_ = nonnegative;
        return t;
    }

    static TerminalValue pathwise(std::string description, PathFn value, bool nonnegative = false) {
        TerminalValue t;
        t.kind_ = Kind::pathwise;
        t.description_ = std::move(description);
        t.path_value_ = std::move(value);
        t.nonnegative_ = nonnegative;
        return t;
    }

    Kind kind() const { return kind_; }
    bool nonnegative() const { return nonnegative_; }
    const std::string& description() const { return description_; }
    bool has_log() const { return static_cast<bool>(log_abs_); }

    double state_value(double w) const {
        if (kind_ != Kind::markovian)
            throw std::invalid_argument("TerminalValue: not a markovian terminal");
        return state_value_(w);
    }

    double log_abs_state(double w) const {
        if (!log_abs_) throw std::invalid_argument("TerminalValue: no log-space form");
        return log_abs_(w);
    }

    double operator()(const PathEnsemble& paths, std::size_t m) const {
        if (kind_ == Kind::pathwise) return path_value_(paths, m);
        if (paths.dim() != 1)
            throw std::invalid_argument("TerminalValue: markovian evaluation requires d=1");
        double w = 0.0;
        for (std::size_t i = 0; i < paths.grid().steps(); ++i) w += paths.increment(m, i);
        return state_value_(w);
    }

    // evaluate on every path of the ensemble
    std::vector<double> sample(const PathEnsemble& paths) const {
        std::vector<double> out(paths.samples());
        if (kind_ == Kind::markovian) {
            if (paths.dim() != 1)
                throw std::invalid_argument("TerminalValue: markovian evaluation requires d=1");
            const auto states = paths.terminal_states();
            for (std::size_t m = 0; m < out.size(); ++m) out[m] = state_value_(states[m]);
        } else {
            for (std::size_t m = 0; m < out.size(); ++m) out[m] = path_value_(paths, m);
        }
        return out;
    }

private:
    Kind kind_ = Kind::markovian;
    std::string description_;
    StateFn state_value_;
    StateFn log_abs_;
    PathFn path_value_;
    bool nonnegative_ = false;
};

// exp((|w| - mu)^2 / 2) - 1: integrable in L log^p L for every p yet outside
// the reach of any gamma = 1 exponential moment. The workhorse stress case.
TerminalValue counterexample_terminal(double mu);

// exp(coeff * |w|)
TerminalValue exp_abs_terminal(double coeff);

// clamp(w, lo, hi)
TerminalValue clamp_terminal(double lo, double hi);

TerminalValue identity_terminal();

TerminalValue constant_terminal(double c);

}  // namespace bsdelab
