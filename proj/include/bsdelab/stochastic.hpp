#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bsdelab/core.hpp"

namespace bsdelab {

// Discretization of [0, T]. Nodes are strictly increasing with t_0 = 0 and
// t_N = T; only uniform spacing is constructible in this version.
class TimeGrid {
public:
    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> nodes);

    double horizon() const { return nodes_.back(); }
    std::size_t steps() const { return nodes_.size() - 1; }
    double node(std::size_t i) const { return nodes_[i]; }
    double dt(std::size_t i) const { return nodes_[i + 1] - nodes_[i]; }
    std::span<const double> nodes() const { return nodes_; }

    bool operator==(const TimeGrid&) const = default;

private:
    std::vector<double> nodes_;
};

TimeGrid build_grid(double horizon, std::size_t steps);

// Seeded d-dimensional Brownian increments over a grid. Samples are generated
// chunk by chunk with per-chunk sub-seeds, so the ensemble is bit-identical
// for a fixed (seed, grid, d, M, chunk size) regardless of how chunks are
// scheduled. Immutable after construction.
class PathEnsemble {
public:
    PathEnsemble(TimeGrid grid, std::size_t dim, std::size_t samples,
                 std::uint64_t seed, std::size_t chunk_size = 4096);

    const TimeGrid& grid() const { return grid_; }
    std::size_t dim() const { return dim_; }
    std::size_t samples() const { return samples_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t chunk_size() const { return chunk_size_; }

    // increment of coordinate k over [t_i, t_{i+1}] for sample m
    double increment(std::size_t m, std::size_t i, std::size_t k = 0) const {
        return increments_[(m * grid_.steps() + i) * dim_ + k];
    }
    std::span<const double> increments() const { return increments_; }

    // W_{t_i} for sample m, coordinate k (sum of the first i increments)
    double state(std::size_t m, std::size_t i, std::size_t k = 0) const;
    // terminal states W_T, coordinate k, over all samples
    std::vector<double> terminal_states(std::size_t k = 0) const;

    bool same_lineage(const PathEnsemble& other) const {
        return seed_ == other.seed_ && dim_ == other.dim_ && samples_ == other.samples_ &&
               chunk_size_ == other.chunk_size_ && grid_ == other.grid_;
    }

    // Same history up to `node`, freshly drawn increments afterwards. Used by
    // the adaptedness diagnostics: anything adapted must be unchanged by a
    // tail resimulation.
    PathEnsemble resample_tail(std::size_t node, std::uint64_t tail_seed) const;

private:
    TimeGrid grid_;
    std::size_t dim_ = 1;
    std::size_t samples_ = 0;
    std::uint64_t seed_ = 0;
    std::size_t chunk_size_ = 4096;
    std::vector<double> increments_;  // [(m*N + i)*d + k]
};

PathEnsemble sample_brownian(const TimeGrid& grid, std::size_t dim, std::size_t samples,
                             std::uint64_t seed, std::size_t chunk_size = 4096);

// Piecewise-constant adapted control, bounded by gamma in Euclidean norm.
// The value on [t_i, t_{i+1}) may depend on path history up to t_i only;
// the factory functions below enforce this by construction.
class ControlProcess {
public:
    double gamma() const { return gamma_; }
    std::size_t dim() const { return dim_; }
    std::size_t steps() const { return steps_; }
    std::size_t samples() const { return samples_; }

    double value(std::size_t m, std::size_t i, std::size_t k = 0) const {
        if (constant_) return constant_value_[k];
        return values_[(m * steps_ + i) * dim_ + k];
    }

    // q identically equal to a fixed vector with |q| <= gamma
    static ControlProcess constant(const PathEnsemble& paths, std::vector<double> q, double gamma);
    // q = ±gamma on the first coordinate, signs drawn from a hash of
    // (control_seed, m, i); independent of all increments, hence adapted
    static ControlProcess bang_bang(const PathEnsemble& paths, double gamma, std::uint64_t control_seed);
    // d=1 feedback on the current state: q_i = clamp to [-gamma, gamma] of fn(i, W_{t_i})
    static ControlProcess state_feedback(const PathEnsemble& paths, double gamma,
                                         const std::function<double(std::size_t, double)>& fn);
    // explicit values, validated against the bound
    static ControlProcess from_values(const PathEnsemble& paths, double gamma, std::vector<double> values);

private:
    ControlProcess() = default;
    double gamma_ = 0.0;
    std::size_t dim_ = 1;
    std::size_t steps_ = 0;
    std::size_t samples_ = 0;
    bool constant_ = false;
    std::vector<double> constant_value_;
    std::vector<double> values_;  // [(m*N + i)*d + k] when not constant
};

// Running exponential-martingale weights for a bounded control, accumulated
// in log space. weight(m, 0) == 1 for every sample.
class GirsanovWeights {
public:
    GirsanovWeights(std::size_t samples, std::size_t nodes)
        : samples_(samples), nodes_(nodes), log_weights_(samples * nodes, 0.0) {}

    std::size_t samples() const { return samples_; }
    std::size_t nodes() const { return nodes_; }

    double log_weight(std::size_t m, std::size_t i) const { return log_weights_[m * nodes_ + i]; }
    double weight(std::size_t m, std::size_t i) const { return std::exp(log_weight(m, i)); }

    double& log_weight_ref(std::size_t m, std::size_t i) { return log_weights_[m * nodes_ + i]; }

private:
    std::size_t samples_;
    std::size_t nodes_;
    std::vector<double> log_weights_;
};

GirsanovWeights girsanov_weights(const PathEnsemble& paths, const ControlProcess& control);

// Left-endpoint Riemann sum of q dW from node `from` to the horizon,
// per sample.
std::vector<double> stochastic_integral(const PathEnsemble& paths, const ControlProcess& control,
                                        std::size_t from = 0);

// Mean of weight(m, node) * values[m] with its standard error.
Estimate weighted_expectation(std::span<const double> values, const GirsanovWeights& weights,
                              std::size_t node);

}  // namespace bsdelab
