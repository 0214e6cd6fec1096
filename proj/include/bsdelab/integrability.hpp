#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bsdelab/orlicz.hpp"
#include "bsdelab/quadrature.hpp"
#include "bsdelab/stochastic.hpp"
#include "bsdelab/terminal.hpp"

namespace bsdelab {

enum class EstimateMethod { quadrature, monte_carlo };

struct FunctionalEstimate {
    std::string name;
    bool finite = true;
    double estimate = 0.0;  // meaningless when finite == false
    double error = 0.0;     // quadrature error bound or Monte Carlo SE
    EstimateMethod method = EstimateMethod::quadrature;
    bool unstable = false;  // MC only: dominated by a handful of samples
    TailEvidence evidence;  // populated on the quadrature route
};

struct IntegrabilityReport {
    std::vector<FunctionalEstimate> entries;

    const FunctionalEstimate* find(std::string_view name) const {
        for (const auto& e : entries)
            if (e.name == name) return &e;
        return nullptr;
    }
};

// Quadrature route, for markovian terminals in d = 1 with terminal time
// `horizon` (so W_T has variance `horizon`). Covers E[psi_lambda(|xi|)] for
// each lambda, E[|xi|^p] and E[|xi| log^p(|xi|+1)] for each p, and the
// exponential-moment entries E[|xi| e^{gamma |W_T|}], E[|xi| e^{+/- gamma W_T}].
IntegrabilityReport integrability_report(const TerminalValue& xi, std::span<const double> lambdas,
                                         std::span<const double> moment_orders, double gamma,
                                         double horizon, const QuadratureOptions& opts = {});

// Monte Carlo route over a supplied ensemble (any terminal kind). Entries
// whose top 1% of samples carry more than half the mass are flagged
// unstable rather than trusted.
IntegrabilityReport integrability_report_mc(const TerminalValue& xi, std::span<const double> lambdas,
                                            std::span<const double> moment_orders, double gamma,
                                            const PathEnsemble& paths);

// Single quadrature entry E[psi_lambda(|xi|)] (markovian terminal, d = 1).
FunctionalEstimate psi_moment(const TerminalValue& xi, double lambda, double horizon,
                              const QuadratureOptions& opts = {});

// Names used for report entries ("psi[lambda=2]", "moment[p=2]", ...).
std::string psi_entry_name(double lambda);
std::string moment_entry_name(double p);
std::string log_moment_entry_name(double p);
inline constexpr const char* kExpAbsEntry = "exp_abs_moment";
inline constexpr const char* kExpPlusEntry = "exp_plus_moment";
inline constexpr const char* kExpMinusEntry = "exp_minus_moment";

}  // namespace bsdelab
