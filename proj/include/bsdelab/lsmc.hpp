#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsdelab/core.hpp"
#include "bsdelab/generator.hpp"
#include "bsdelab/regression.hpp"
#include "bsdelab/stochastic.hpp"
#include "bsdelab/terminal.hpp"

namespace bsdelab {

struct NodeDiagnostics {
    std::size_t node = 0;
    std::size_t max_fixed_point_iterations = 0;
    double smallest_singular_value = 0.0;
    bool ridge_used = false;
    bool degenerate_state = false;
};

struct SolverOptions {
    std::size_t max_fixed_point_iterations = 50;
    double fixed_point_tol = 1e-12;
};

// Backward regression solution. y is samples x (N+1); z is samples x (N*d)
// with z(m, i*d + k) the k-th component on [t_i, t_{i+1}). The terminal
// column of y equals the terminal functional exactly.
struct BsdeSolution {
    TimeGrid grid;
    std::size_t dim = 1;
    std::uint64_t seed = 0;          // ensemble lineage
    std::size_t chunk_size = 0;
    std::string basis_description;
    Matrix y;
    Matrix z;
    std::vector<NodeDiagnostics> diagnostics;
    Estimate y0;

    double z_at(std::size_t m, std::size_t i, std::size_t k = 0) const {
        return z(m, i * dim + k);
    }
};

// Backward induction: y(., N) = xi; z(., i) regresses Y_{i+1} dW_i / dt_i on
// the basis at W_{t_i}; y(., i) solves y = E[Y_{i+1}|state] + dt f(t_i, y, z)
// by fixed-point iteration. Requires beta dt_i < 1 on every step and at
// least 10 samples per basis function.
BsdeSolution solve(const TerminalValue& xi, const GeneratorSpec& gen, const PathEnsemble& paths,
                   const RegressionBasis& basis, const SolverOptions& options = {});

// Reference solution for a nondecreasing markovian terminal in d = 1:
// Y(t, w) = e^{beta (T-t)} E[g(w + gamma (T-t) + sqrt(T-t) X)] + discounted
// alpha integral, with X standard normal. Valid because the optimal control
// is the constant +gamma when g is monotone (the solver's z stays >= 0).
class ClosedFormOracle {
public:
    ClosedFormOracle(const TerminalValue& xi, const GeneratorSpec& gen, double horizon);

    double operator()(double t, double w) const;
    double at_origin() const { return (*this)(0.0, 0.0); }

private:
    TerminalValue xi_;
    double beta_;
    double gamma_;
    AlphaFunction alpha_;
    double horizon_;
};

struct ComparisonReport {
    std::size_t violations = 0;
    std::size_t total = 0;
    double fraction = 0.0;
    double max_excess = 0.0;
    bool pass = false;
};

// Fraction of (sample, node) entries where a exceeds b by more than tol;
// passes below 0.1%. Inputs must share grid and ensemble lineage.
ComparisonReport comparison_check(const BsdeSolution& a, const BsdeSolution& b, double tol);

// Empirical versions of the process norms on the grid: sup over nodes for y,
// Riemann sum of |z|^2 for the martingale part.
double sp_norm(const BsdeSolution& sol, double p);
double mp_norm(const BsdeSolution& sol, double p);

}  // namespace bsdelab
