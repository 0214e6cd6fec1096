#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bsdelab/core.hpp"
#include "bsdelab/generator.hpp"
#include "bsdelab/lsmc.hpp"
#include "bsdelab/orlicz.hpp"
#include "bsdelab/regression.hpp"
#include "bsdelab/stochastic.hpp"
#include "bsdelab/terminal.hpp"

namespace bsdelab {

// Pathwise dominating process
//   e^{beta (T-t)} (1/sqrt(1 - lambda gamma^2 (T-t)) + e^{2/lambda} E[psi(|xi|)|F_t])
//   + discounted alpha integral,
// defined whenever lambda gamma^2 T < 1.
struct BoundProcess {
    TimeGrid grid;
    double lambda = 0.0;
    Matrix values;       // samples x (N+1)
    std::string method;  // conditional-expectation estimator used
};

BoundProcess apriori_bound(const TerminalValue& xi, const GeneratorSpec& gen, double lambda,
                           const PathEnsemble& paths,
                           const RegressionBasis& regression_fallback = RegressionBasis::polynomial(4));

// Value of one admissible control in the dual representation, at t = 0:
// E[M^q_T e^{beta T} xi] + int_0^T e^{beta s} alpha_s ds.
Estimate dual_value(const TerminalValue& xi, const ControlProcess& q, const GeneratorSpec& gen,
                    const PathEnsemble& paths);

// Per-path conditional version at an interior node, by regression of the
// reweighted terminal on the basis at W_{t_i}.
std::vector<double> dual_value_at(const TerminalValue& xi, const ControlProcess& q,
                                  const GeneratorSpec& gen, const PathEnsemble& paths,
                                  std::size_t node, const RegressionBasis& basis);

struct DualFamilyOptions {
    std::vector<double> constant_values;  // d=1 control levels; default {-gamma, +gamma}
    std::size_t bang_bang_count = 0;
    std::uint64_t bang_bang_seed = 7;
    const BsdeSolution* feedback = nullptr;  // adds q = gamma * sgn(z) from a solved BSDE
};

struct DualFamilyResult {
    std::string best_tag;
    Estimate best;
    std::vector<std::pair<std::string, Estimate>> family;
};

// Maximum of dual_value over a finite control family. This is a lower bound
// of the essential supremum by construction; no attainment is claimed.
DualFamilyResult dual_family_max(const TerminalValue& xi, const GeneratorSpec& gen,
                                 const PathEnsemble& paths, const DualFamilyOptions& options);

struct PhiMomentCheck {
    Estimate lhs;
    double bound = 0.0;
    bool pass = false;
};

// Monte Carlo check of E[phi_lambda(e^{int_t^T q dW})] against the closed
// bound 1/sqrt(1 - lambda gamma^2 (T - t)).
PhiMomentCheck phi_moment_check(double lambda, const ControlProcess& q, const PathEnsemble& paths,
                                std::size_t node);

}  // namespace bsdelab
