#include "bsdelab/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bsdelab {

TruncationSchedule::TruncationSchedule(std::vector<std::pair<double, double>> r)
    : rungs(std::move(r)) {
    if (rungs.size() < 3) throw std::invalid_argument("TruncationSchedule: need at least 3 rungs");
    for (std::size_t j = 0; j < rungs.size(); ++j) {
        if (!(rungs[j].first > 0.0) || !(rungs[j].second > 0.0))
            throw std::invalid_argument("TruncationSchedule: levels must be positive");
        if (j > 0 && (rungs[j].first < rungs[j - 1].first || rungs[j].second < rungs[j - 1].second))
            throw std::invalid_argument("TruncationSchedule: levels must be nondecreasing");
    }
}

TruncationSchedule TruncationSchedule::dyadic(int j_lo, int j_hi) {
    if (j_hi < j_lo) throw std::invalid_argument("TruncationSchedule: empty dyadic range");
    std::vector<std::pair<double, double>> r;
    for (int j = j_lo; j <= j_hi; ++j) {
        const double level = std::ldexp(1.0, j);
        r.emplace_back(level, level);
    }
    return TruncationSchedule(std::move(r));
}

TruncationSchedule TruncationSchedule::upper(std::vector<double> levels, double p_fixed) {
    std::vector<std::pair<double, double>> r;
    for (double n : levels) r.emplace_back(n, p_fixed);
    return TruncationSchedule(std::move(r));
}

TruncationSchedule TruncationSchedule::lower(double n_fixed, std::vector<double> levels) {
    std::vector<std::pair<double, double>> r;
    for (double p : levels) r.emplace_back(n_fixed, p);
    return TruncationSchedule(std::move(r));
}

TerminalValue truncate_terminal(const TerminalValue& xi, double n, double p) {
    if (!(n > 0.0) || !(p > 0.0))
        throw std::invalid_argument("truncate_terminal: levels must be positive");
    auto clip = [n, p](double v) {
        const double plus = std::min(std::max(v, 0.0), n);
        const double minus = std::min(std::max(-v, 0.0), p);
        return plus - minus;
    };
    std::ostringstream name;
    name << xi.description() << "^(n=" << n << ",p=" << p << ")";
    if (xi.kind() == TerminalValue::Kind::markovian) {
        auto base = xi;  // copy keeps the callable alive inside the lambda
        return TerminalValue::markovian(
            name.str(), [base, clip](double w) { return clip(base.state_value(w)); }, {},
            xi.nonnegative());
    }
    auto base = xi;
    return TerminalValue::pathwise(
        name.str(),
        [base, clip](const PathEnsemble& paths, std::size_t m) { return clip(base(paths, m)); },
        xi.nonnegative());
}

std::vector<std::size_t> hitting_time(const Matrix& values, double level) {
    if (!(level > 0.0)) throw std::invalid_argument("hitting_time: level must be positive");
    std::vector<std::size_t> out(values.rows());
    const std::size_t last = values.cols() - 1;
    for (std::size_t m = 0; m < values.rows(); ++m) {
        std::size_t hit = last;
        for (std::size_t i = 0; i < values.cols(); ++i) {
            if (values(m, i) > level) {
                hit = i;
                break;
            }
        }
        out[m] = hit;
    }
    return out;
}

const char* to_string(LadderVerdict v) {
    switch (v) {
        case LadderVerdict::converging:
            return "CONVERGING";
        case LadderVerdict::diverging:
            return "DIVERGING";
        case LadderVerdict::inconclusive:
            return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

namespace {

// A rung transition is judged by how many samples the finer cap actually
// touches: `active` increments are estimable, `zero` ones are exactly zero
// under common random numbers (no sample capped at all), and `gray` ones sit
// on too few samples to resolve either way.
struct Transition {
    enum class Kind { active, gray, zero };
    double delta = 0.0;
    double se = 0.0;
    Kind kind = Transition::Kind::zero;
};

LadderVerdict classify(const std::vector<Transition>& transitions) {
    if (transitions.empty()) return LadderVerdict::inconclusive;

    auto small = [](const Transition& t) {
        return std::abs(t.delta) < std::max(1e-3, 3.0 * t.se);
    };

    std::vector<const Transition*> active;
    std::ptrdiff_t last_active = -1;
    for (std::size_t k = 0; k < transitions.size(); ++k) {
        if (transitions[k].kind == Transition::Kind::active) {
            active.push_back(&transitions[k]);
            last_active = static_cast<std::ptrdiff_t>(k);
        }
    }

    // a tail of structurally zero transitions means the ladder is exactly
    // constant from some rung on
    bool tail_all_zero = static_cast<std::size_t>(last_active + 1) < transitions.size();
    for (std::size_t k = static_cast<std::size_t>(last_active + 1); k < transitions.size(); ++k)
        if (transitions[k].kind != Transition::Kind::zero) tail_all_zero = false;
    if (tail_all_zero) return LadderVerdict::converging;

    if (active.empty()) {
        // only gray or zero transitions: trust smallness, nothing else
        bool all_small = true;
        for (const auto& t : transitions)
            if (t.kind == Transition::Kind::gray && !small(t)) all_small = false;
        return all_small ? LadderVerdict::converging : LadderVerdict::inconclusive;
    }

    const bool last_two_small = small(*active.back()) &&
                                (active.size() < 2 || small(*active[active.size() - 2]));
    if (last_two_small) return LadderVerdict::converging;

    if (active.size() >= 3) {
        bool diverging = true;
        const std::size_t base = active.size() - 3;
        for (std::size_t k = base; k < active.size(); ++k) {
            const Transition& t = *active[k];
            if (!(t.delta > 5.0 * t.se)) diverging = false;
            // growth must not collapse toward zero across the window
            if (k > base && !(active[k]->delta >= 0.6 * active[k - 1]->delta)) diverging = false;
        }
        if (diverging) return LadderVerdict::diverging;
    }
    return LadderVerdict::inconclusive;
}

}  // namespace

LadderReport run_ladder(const TerminalValue& xi, const GeneratorSpec& gen,
                        const TruncationSchedule& schedule, const PathEnsemble& paths,
                        const RegressionBasis& basis, const LadderOptions& options) {
    LadderReport report;
    const std::vector<double> raw = xi.sample(paths);

    // domination bound when the sufficiency regime applies
    std::optional<Matrix> bound;
    if (options.lambda) {
        const double lgt = *options.lambda * gen.gamma() * gen.gamma() * paths.grid().horizon();
        bool psi_finite = true;
        if (xi.kind() == TerminalValue::Kind::markovian && paths.dim() == 1) {
            try {
                psi_finite = psi_moment(xi, *options.lambda, paths.grid().horizon()).finite;
            } catch (const numerical_error&) {
                psi_finite = false;
            }
        }
        if (lgt < 1.0 && psi_finite) {
            bound = apriori_bound(xi, gen, *options.lambda, paths).values;
            report.bound_checked = true;
        }
    }

    // Y of the most recently solved rung; monotone comparisons remain valid
    // across a failed rung since the levels are nondecreasing throughout.
    std::optional<Matrix> prev_y;
    std::optional<std::size_t> prev_index;
    std::vector<Transition> transitions;

    for (const auto& [n_level, p_level] : schedule.rungs) {
        RungResult rung;
        rung.n = n_level;
        rung.p = p_level;
        for (double v : raw) {
            if (v > n_level) ++rung.capped_upper;
            if (-v > p_level) ++rung.capped_lower;
        }

        std::optional<Matrix> current;
        try {
            BsdeSolution sol =
                solve(truncate_terminal(xi, n_level, p_level), gen, paths, basis, options.solver);
            rung.solved = true;
            rung.y0 = sol.y0;
            current = std::move(sol.y);
        } catch (const std::exception& e) {
            rung.error = e.what();
        }

        if (current && bound) {
            const double tol = 3.0 * rung.y0.std_error;
            for (std::size_t m = 0; m < current->rows(); ++m)
                for (std::size_t i = 0; i < current->cols(); ++i) {
                    ++report.bound_total;
                    if ((*current)(m, i) > (*bound)(m, i) + tol) ++report.bound_violations;
                }
        }

        if (current && prev_y) {
            const RungResult& prev_rung = report.rungs[*prev_index];
            const bool n_up = rung.n > prev_rung.n;
            const bool p_up = rung.p > prev_rung.p;
            // regression wiggle sets the comparison tolerance: fitted values
            // of the two rungs differ by a polynomial whose dips below zero
            // scale with the rung noise, not with machine precision
            const double eps_base =
                3.0 * (rung.y0.std_error + prev_rung.y0.std_error);
            // both levels moving is an n-move when the negative part never
            // binds (nonnegative terminal); otherwise the pair is skipped
            const bool treat_as_n = n_up && (!p_up || xi.nonnegative());
            const bool treat_as_p = p_up && !n_up;
            if (treat_as_n || treat_as_p) {
                for (std::size_t m = 0; m < current->rows(); ++m) {
                    for (std::size_t i = 0; i < current->cols(); ++i) {
                        const double a = (*prev_y)(m, i);
                        const double b = (*current)(m, i);
                        const double eps = eps_base + 1e-8 * (1.0 + std::abs(a) + std::abs(b));
                        if (treat_as_n) {
                            ++report.mono_n_total;
                            if (b < a - eps) ++report.mono_n_violations;
                        } else {
                            ++report.mono_p_total;
                            if (b > a + eps) ++report.mono_p_violations;
                        }
                    }
                }
            }

            Transition t;
            t.delta = rung.y0.value - prev_rung.y0.value;
            // the verdict looks at increments of CRN-coupled estimates, so
            // the relevant noise is the spread of the pathwise differences
            {
                std::vector<double> diff(current->rows());
                for (std::size_t m = 0; m < current->rows(); ++m)
                    diff[m] = (*current)(m, 1) - (*prev_y)(m, 1);
                t.se = mean_se(diff).std_error / (1.0 - gen.beta() * paths.grid().dt(0));
            }
            const std::size_t touched = (n_up ? prev_rung.capped_upper : 0) +
                                        (p_up ? prev_rung.capped_lower : 0);
            if (touched == 0)
                t.kind = Transition::Kind::zero;
            else if ((n_up && prev_rung.capped_upper >= options.active_min_samples) ||
                     (p_up && prev_rung.capped_lower >= options.active_min_samples))
                t.kind = Transition::Kind::active;
            else
                t.kind = Transition::Kind::gray;
            transitions.push_back(t);
        }

        if (rung.solved) {
            prev_y = std::move(current);
            prev_index = report.rungs.size();
        }
        report.rungs.push_back(std::move(rung));
    }

    report.verdict = classify(transitions);

    const Matrix* diagnostic = bound ? &*bound : (prev_y ? &*prev_y : nullptr);
    if (diagnostic) {
        for (double level : options.hitting_levels) {
            const auto hits = hitting_time(*diagnostic, level);
            std::vector<std::size_t> histogram(diagnostic->cols(), 0);
            for (std::size_t h : hits) ++histogram[h];
            report.hitting_histograms.emplace_back(level, std::move(histogram));
        }
    }
    return report;
}

NecessityCheck necessity_check(const TerminalValue& xi, double gamma, double horizon,
                               const QuadratureOptions& opts) {
    if (xi.kind() != TerminalValue::Kind::markovian)
        throw std::invalid_argument("necessity_check: needs a markovian terminal (d=1)");
    if (!xi.nonnegative())
        throw std::invalid_argument("necessity_check: terminal must be nonnegative");
    const IntegrabilityReport report = integrability_report(xi, {}, {}, gamma, horizon, opts);
    NecessityCheck check;
    check.pass = true;
    for (const char* name : {kExpPlusEntry, kExpMinusEntry, kExpAbsEntry}) {
        const FunctionalEstimate* e = report.find(name);
        if (e == nullptr) continue;
        check.entries.push_back(*e);
        if (!e->finite) check.pass = false;
    }
    return check;
}

}  // namespace bsdelab
