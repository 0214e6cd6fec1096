#include "bsdelab/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace bsdelab {

namespace {

// splitmix64; standard 64-bit seed mixer
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk) {
    return mix64(seed ^ mix64(chunk + 1));
}

}  // namespace

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw std::invalid_argument("TimeGrid: need at least two nodes");
    if (nodes_.front() != 0.0) throw std::invalid_argument("TimeGrid: first node must be 0");
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        if (!(nodes_[i + 1] > nodes_[i]))
            throw std::invalid_argument("TimeGrid: nodes must be strictly increasing");
    }
}

TimeGrid build_grid(double horizon, std::size_t steps) {
    if (!(horizon > 0.0)) throw std::invalid_argument("build_grid: horizon must be positive");
    if (steps < 1) throw std::invalid_argument("build_grid: need at least one step");
    std::vector<double> nodes(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i)
        nodes[i] = horizon * static_cast<double>(i) / static_cast<double>(steps);
    nodes.back() = horizon;
    return TimeGrid(std::move(nodes));
}

PathEnsemble::PathEnsemble(TimeGrid grid, std::size_t dim, std::size_t samples,
                           std::uint64_t seed, std::size_t chunk_size)
    : grid_(std::move(grid)), dim_(dim), samples_(samples), seed_(seed), chunk_size_(chunk_size) {
    if (dim_ < 1) throw std::invalid_argument("PathEnsemble: dimension must be >= 1");
    if (samples_ < 1) throw std::invalid_argument("PathEnsemble: sample count must be >= 1");
    if (chunk_size_ < 1) throw std::invalid_argument("PathEnsemble: chunk size must be >= 1");

    const std::size_t n = grid_.steps();
    std::vector<double> sqrt_dt(n);
    for (std::size_t i = 0; i < n; ++i) sqrt_dt[i] = std::sqrt(grid_.dt(i));

    increments_.resize(samples_ * n * dim_);
    const std::size_t chunks = (samples_ + chunk_size_ - 1) / chunk_size_;
    for (std::size_t c = 0; c < chunks; ++c) {
        std::mt19937_64 rng(chunk_seed(seed_, c));
        std::normal_distribution<double> gauss(0.0, 1.0);
        const std::size_t lo = c * chunk_size_;
        const std::size_t hi = std::min(samples_, lo + chunk_size_);
        for (std::size_t m = lo; m < hi; ++m) {
            double* row = increments_.data() + m * n * dim_;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < dim_; ++k) row[i * dim_ + k] = sqrt_dt[i] * gauss(rng);
        }
    }
}

double PathEnsemble::state(std::size_t m, std::size_t i, std::size_t k) const {
    double w = 0.0;
    const double* row = increments_.data() + m * grid_.steps() * dim_;
    for (std::size_t j = 0; j < i; ++j) w += row[j * dim_ + k];
    return w;
}

std::vector<double> PathEnsemble::terminal_states(std::size_t k) const {
    const std::size_t n = grid_.steps();
    std::vector<double> out(samples_);
    for (std::size_t m = 0; m < samples_; ++m) {
        double w = 0.0;
        const double* row = increments_.data() + m * n * dim_;
        for (std::size_t i = 0; i < n; ++i) w += row[i * dim_ + k];
        out[m] = w;
    }
    return out;
}

PathEnsemble sample_brownian(const TimeGrid& grid, std::size_t dim, std::size_t samples,
                             std::uint64_t seed, std::size_t chunk_size) {
    return PathEnsemble(grid, dim, samples, seed, chunk_size);
}

PathEnsemble PathEnsemble::resample_tail(std::size_t node, std::uint64_t tail_seed) const {
    if (node > grid_.steps()) throw std::invalid_argument("resample_tail: node out of range");
    PathEnsemble out = *this;
    const std::size_t n = grid_.steps();
    std::vector<double> sqrt_dt(n);
    for (std::size_t i = 0; i < n; ++i) sqrt_dt[i] = std::sqrt(grid_.dt(i));
    const std::size_t chunks = (samples_ + chunk_size_ - 1) / chunk_size_;
    for (std::size_t c = 0; c < chunks; ++c) {
        std::mt19937_64 rng(chunk_seed(tail_seed, c));
        std::normal_distribution<double> gauss(0.0, 1.0);
        const std::size_t lo = c * chunk_size_;
        const std::size_t hi = std::min(samples_, lo + chunk_size_);
        for (std::size_t m = lo; m < hi; ++m) {
            double* row = out.increments_.data() + m * n * dim_;
            for (std::size_t i = node; i < n; ++i)
                for (std::size_t k = 0; k < dim_; ++k) row[i * dim_ + k] = sqrt_dt[i] * gauss(rng);
        }
    }
    return out;
}

ControlProcess ControlProcess::constant(const PathEnsemble& paths, std::vector<double> q, double gamma) {
    if (q.size() != paths.dim()) throw std::invalid_argument("ControlProcess: dimension mismatch");
    if (!(gamma > 0.0)) throw std::invalid_argument("ControlProcess: gamma must be positive");
    double norm2 = 0.0;
    for (double v : q) norm2 += v * v;
    if (norm2 > gamma * gamma * (1.0 + 1e-12))
        throw std::invalid_argument("ControlProcess: |q| exceeds gamma");
    ControlProcess c;
    c.gamma_ = gamma;
    c.dim_ = paths.dim();
    c.steps_ = paths.grid().steps();
    c.samples_ = paths.samples();
    c.constant_ = true;
    c.constant_value_ = std::move(q);
    return c;
}

ControlProcess ControlProcess::bang_bang(const PathEnsemble& paths, double gamma,
                                         std::uint64_t control_seed) {
    if (!(gamma > 0.0)) throw std::invalid_argument("ControlProcess: gamma must be positive");
    ControlProcess c;
    c.gamma_ = gamma;
    c.dim_ = paths.dim();
    c.steps_ = paths.grid().steps();
    c.samples_ = paths.samples();
    c.values_.assign(c.samples_ * c.steps_ * c.dim_, 0.0);
    for (std::size_t m = 0; m < c.samples_; ++m) {
        for (std::size_t i = 0; i < c.steps_; ++i) {
            const std::uint64_t h = mix64(control_seed ^ mix64(m * 0x100000001ULL + i));
            const double sign = (h & 1u) ? 1.0 : -1.0;
            c.values_[(m * c.steps_ + i) * c.dim_] = sign * gamma;
        }
    }
    return c;
}

ControlProcess ControlProcess::state_feedback(const PathEnsemble& paths, double gamma,
                                              const std::function<double(std::size_t, double)>& fn) {
    if (paths.dim() != 1) throw std::invalid_argument("ControlProcess: state feedback requires d=1");
    if (!(gamma > 0.0)) throw std::invalid_argument("ControlProcess: gamma must be positive");
    ControlProcess c;
    c.gamma_ = gamma;
    c.dim_ = 1;
    c.steps_ = paths.grid().steps();
    c.samples_ = paths.samples();
    c.values_.assign(c.samples_ * c.steps_, 0.0);
    for (std::size_t m = 0; m < c.samples_; ++m) {
        double w = 0.0;  // W_{t_i}, accumulated forward: uses history only
        for (std::size_t i = 0; i < c.steps_; ++i) {
            c.values_[m * c.steps_ + i] = std::clamp(fn(i, w), -gamma, gamma);
            w += paths.increment(m, i);
        }
    }
    return c;
}

ControlProcess ControlProcess::from_values(const PathEnsemble& paths, double gamma,
                                           std::vector<double> values) {
    if (!(gamma > 0.0)) throw std::invalid_argument("ControlProcess: gamma must be positive");
    const std::size_t expected = paths.samples() * paths.grid().steps() * paths.dim();
    if (values.size() != expected) throw std::invalid_argument("ControlProcess: value array size mismatch");
    const std::size_t d = paths.dim();
    const double bound2 = gamma * gamma * (1.0 + 1e-12);
    for (std::size_t mi = 0; mi < values.size() / d; ++mi) {
        double norm2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) norm2 += values[mi * d + k] * values[mi * d + k];
        if (norm2 > bound2) throw std::invalid_argument("ControlProcess: |q| exceeds gamma");
    }
    ControlProcess c;
    c.gamma_ = gamma;
    c.dim_ = d;
    c.steps_ = paths.grid().steps();
    c.samples_ = paths.samples();
    c.values_ = std::move(values);
    return c;
}

GirsanovWeights girsanov_weights(const PathEnsemble& paths, const ControlProcess& control) {
    if (control.samples() != paths.samples() || control.steps() != paths.grid().steps() ||
        control.dim() != paths.dim())
        throw std::invalid_argument("girsanov_weights: control does not match ensemble");
    const std::size_t n = paths.grid().steps();
    const std::size_t d = paths.dim();
    GirsanovWeights w(paths.samples(), n + 1);
    for (std::size_t m = 0; m < paths.samples(); ++m) {
        double acc = 0.0;
        w.log_weight_ref(m, 0) = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double qdw = 0.0;
            double q2 = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double q = control.value(m, i, k);
                qdw += q * paths.increment(m, i, k);
                q2 += q * q;
            }
            acc += qdw - 0.5 * q2 * paths.grid().dt(i);
            w.log_weight_ref(m, i + 1) = acc;
        }
    }
    return w;
}

std::vector<double> stochastic_integral(const PathEnsemble& paths, const ControlProcess& control,
                                        std::size_t from) {
    if (control.samples() != paths.samples() || control.steps() != paths.grid().steps() ||
        control.dim() != paths.dim())
        throw std::invalid_argument("stochastic_integral: control does not match ensemble");
    if (from > paths.grid().steps())
        throw std::invalid_argument("stochastic_integral: start node out of range");
    const std::size_t n = paths.grid().steps();
    const std::size_t d = paths.dim();
    std::vector<double> out(paths.samples(), 0.0);
    for (std::size_t m = 0; m < paths.samples(); ++m) {
        double acc = 0.0;
        for (std::size_t i = from; i < n; ++i)
            for (std::size_t k = 0; k < d; ++k) acc += control.value(m, i, k) * paths.increment(m, i, k);
        out[m] = acc;
    }
    return out;
}

Estimate weighted_expectation(std::span<const double> values, const GirsanovWeights& weights,
                              std::size_t node) {
    if (values.empty()) throw std::invalid_argument("weighted_expectation: empty ensemble");
    if (values.size() != weights.samples())
        throw std::invalid_argument("weighted_expectation: values and weights differ in size");
    if (node >= weights.nodes()) throw std::invalid_argument("weighted_expectation: node out of range");
    std::vector<double> weighted(values.size());
    for (std::size_t m = 0; m < values.size(); ++m) weighted[m] = weights.weight(m, node) * values[m];
    return mean_se(weighted);
}

}  // namespace bsdelab
