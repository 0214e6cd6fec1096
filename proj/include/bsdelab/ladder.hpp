#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bsdelab/dual.hpp"
#include "bsdelab/integrability.hpp"
#include "bsdelab/lsmc.hpp"

namespace bsdelab {

// Nondecreasing truncation levels (n_j, p_j) for xi+ ^ n - xi- ^ p.
struct TruncationSchedule {
    std::vector<std::pair<double, double>> rungs;

    explicit TruncationSchedule(std::vector<std::pair<double, double>> r);

    // n_j = p_j = 2^j for j in [j_lo, j_hi]
    static TruncationSchedule dyadic(int j_lo, int j_hi);
    // vary the upper level only / the lower level only
    static TruncationSchedule upper(std::vector<double> levels, double p_fixed);
    static TruncationSchedule lower(double n_fixed, std::vector<double> levels);
};

// pointwise xi+ ^ n - xi- ^ p; bounded by max(n, p)
TerminalValue truncate_terminal(const TerminalValue& xi, double n, double p);

enum class LadderVerdict { converging, diverging, inconclusive };

const char* to_string(LadderVerdict v);

struct RungResult {
    double n = 0.0, p = 0.0;
    Estimate y0;
    std::size_t capped_upper = 0;  // samples with xi+ > n
    std::size_t capped_lower = 0;  // samples with xi- > p
    bool solved = false;
    std::string error;
};

struct LadderOptions {
    // enables the domination check against the a priori bound when valid
    std::optional<double> lambda;
    std::vector<double> hitting_levels{10.0, 100.0};
    // a rung transition only enters the verdict once this many samples are
    // actually capped: below that the rung difference is pure noise
    std::size_t active_min_samples = 20;
    SolverOptions solver;
};

struct LadderReport {
    std::vector<RungResult> rungs;
    std::size_t mono_n_violations = 0, mono_n_total = 0;
    std::size_t mono_p_violations = 0, mono_p_total = 0;
    bool bound_checked = false;
    std::size_t bound_violations = 0, bound_total = 0;
    LadderVerdict verdict = LadderVerdict::inconclusive;
    // per level: count of paths first exceeding it at each node (last bin =
    // never before the horizon)
    std::vector<std::pair<double, std::vector<std::size_t>>> hitting_histograms;

    double violation_fraction_n() const {
        return mono_n_total == 0 ? 0.0
                                 : static_cast<double>(mono_n_violations) /
                                       static_cast<double>(mono_n_total);
    }
    double violation_fraction_p() const {
        return mono_p_total == 0 ? 0.0
                                 : static_cast<double>(mono_p_violations) /
                                       static_cast<double>(mono_p_total);
    }
    double bound_violation_fraction() const {
        return bound_total == 0 ? 0.0
                                : static_cast<double>(bound_violations) /
                                      static_cast<double>(bound_total);
    }
};

// Solves every rung on the one shared ensemble (common random numbers),
// checks pathwise monotonicity across rungs, optionally checks domination by
// the a priori bound, and classifies the rung values as converging,
// diverging or inconclusive.
LadderReport run_ladder(const TerminalValue& xi, const GeneratorSpec& gen,
                        const TruncationSchedule& schedule, const PathEnsemble& paths,
                        const RegressionBasis& basis, const LadderOptions& options = {});

// First node where the row exceeds the level; steps() if never (hitting at
// the terminal node is not distinguished from never hitting).
std::vector<std::size_t> hitting_time(const Matrix& values, double level);

struct NecessityCheck {
    bool pass = false;
    std::vector<FunctionalEstimate> entries;
};

// Quadrature check of the exponential moments xi e^{+/- gamma W_T} and
// xi e^{gamma |W_T|}; any divergent entry certifies that no nonnegative
// solution of the typical-case equation exists.
NecessityCheck necessity_check(const TerminalValue& xi, double gamma, double horizon,
                               const QuadratureOptions& opts = {});

}  // namespace bsdelab
