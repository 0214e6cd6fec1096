#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsdelab {

// Thrown when an iterative procedure fails to converge or a truncation
// ladder cannot be classified. Maps to CLI exit code 3.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown when a computed quantity violates one of the inequalities the
// library is built to uphold. Maps to CLI exit code 4.
class invariant_violation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log sqrt(2*pi)

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x - kLogSqrt2Pi);
}

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// log(1 + e^u), stable for large |u|
inline double log1p_exp(double u) {
    if (u > 0) return u + std::log1p(std::exp(-u));
    return std::log1p(std::exp(u));
}

// log(e^u - 1) for u > 0, stable near 0 and for large u
inline double log_expm1(double u) {
    if (u > 36.0) return u;  // e^{-u} below double epsilon
    if (u > 1e-8) return u + std::log1p(-std::exp(-u));
    return std::log(std::expm1(u));
}

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

// Mean and standard error of the mean, fixed left-to-right summation order.
inline Estimate mean_se(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mean_se: empty sample");
    double sum = 0.0;
    for (double v : values) sum += v;
    const double n = static_cast<double>(values.size());
    const double mean = sum / n;
    if (values.size() == 1) return {mean, 0.0};
    double sq = 0.0;
    for (double v : values) {
        const double d = v - mean;
        sq += d * d;
    }
    const double variance = sq / (n - 1.0);
    return {mean, std::sqrt(variance / n)};
}

inline double sample_variance(std::span<const double> values) {
    if (values.size() < 2) throw std::invalid_argument("sample_variance: need at least 2 samples");
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) {
        const double d = v - mean;
        sq += d * d;
    }
    return sq / (static_cast<double>(values.size()) - 1.0);
}

// Dense row-major matrix holding per-sample, per-node process values.
// Rows index Monte Carlo samples, columns index grid nodes.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double init = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, init) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace bsdelab
