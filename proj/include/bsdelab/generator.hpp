#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bsdelab/core.hpp"
#include "bsdelab/quadrature.hpp"

namespace bsdelab {

// Integrable deterministic coefficient t -> alpha_t on [0, T], with closed
// antiderivatives for the constant and piecewise-constant cases.
class AlphaFunction {
public:
    static AlphaFunction zero() { return constant(0.0); }

    static AlphaFunction constant(double c) {
        AlphaFunction a;
        a.kind_ = Kind::constant;
        a.constant_ = c;
        return a;
    }

    // breaks = interior breakpoints 0 < b_1 < ... < b_{k-1}; values has one
    // more entry than breaks (value on each piece, last piece unbounded)
    static AlphaFunction piecewise(std::vector<double> breaks, std::vector<double> values);

    static AlphaFunction callable(std::function<double(double)> f) {
        if (!f) throw std::invalid_argument("AlphaFunction: empty callable");
        AlphaFunction a;
        a.kind_ = Kind::callable;
        a.fn_ = std::move(f);
        return a;
    }

    double operator()(double t) const;

    // plain integral over [t0, t1]
    double integral(double t0, double t1) const;

    // discounted integral of e^{beta (s - t)} alpha_s over [t, horizon]
    double discounted_integral(double beta, double t, double horizon) const;

    bool is_zero() const { return kind_ == Kind::constant && constant_ == 0.0; }

private:
    enum class Kind { constant, piecewise, callable };
    AlphaFunction() = default;

    Kind kind_ = Kind::constant;
    double constant_ = 0.0;
    std::vector<double> breaks_;
    std::vector<double> values_;
    std::function<double(double)> fn_;
};

// Generator with a declared linear-growth certificate |f| <= alpha_t +
// beta |y| + gamma |z|. Without a custom driver this is the typical case
// f(t, y, z) = alpha_t + beta y + gamma |z|.
class GeneratorSpec {
public:
    using Driver = std::function<double(double, double, std::span<const double>)>;

    static GeneratorSpec typical_case(double beta, double gamma, AlphaFunction alpha);

    // Custom driver; the certificate is spot-checked on a seeded sample of
    // (t, y, z) triples at construction.
    static GeneratorSpec with_driver(double beta, double gamma, AlphaFunction alpha, Driver f,
                                     double horizon_hint = 1.0);

    double beta() const { return beta_; }
    double gamma() const { return gamma_; }
    const AlphaFunction& alpha() const { return alpha_; }
    bool typical() const { return !driver_; }

    double operator()(double t, double y, std::span<const double> z) const;

private:
    GeneratorSpec() = default;
    double beta_ = 0.0;
    double gamma_ = 1.0;
    AlphaFunction alpha_ = AlphaFunction::zero();
    Driver driver_;
};

double euclidean_norm(std::span<const double> z);

}  // namespace bsdelab
