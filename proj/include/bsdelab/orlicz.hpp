#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "bsdelab/core.hpp"

namespace bsdelab {

// Weight parameter of the psi/phi pair. When a (gamma, horizon) context is
// attached, `sufficient` records whether lambda * gamma^2 * T < 1, the
// regime in which the a priori bound is valid.
struct LambdaParam {
    double lambda;
    std::optional<bool> sufficient;

    explicit LambdaParam(double lam) : lambda(lam) {
        if (!(lam > 0.0)) throw std::invalid_argument("LambdaParam: lambda must be positive");
    }
    LambdaParam(double lam, double gamma, double horizon) : LambdaParam(lam) {
        sufficient = lam * gamma * gamma * horizon < 1.0;
    }
};

// psi(x) = x * exp(sqrt((2/lambda) * log(x+1))), x >= 0
inline double psi(double lambda, double x) {
    if (!(lambda > 0.0)) throw std::invalid_argument("psi: lambda must be positive");
    if (x < 0.0) throw std::domain_error("psi: negative argument");
    if (x == 0.0) return 0.0;
    return x * std::exp(std::sqrt(2.0 / lambda * std::log1p(x)));
}

// log psi(x) given u = log x; valid for x > 0
inline double log_psi_from_log(double lambda, double log_x) {
    return log_x + std::sqrt(2.0 / lambda * log1p_exp(log_x));
}

// phi(x) = exp(lambda/2 * log(x)^2), x > 0; phi(e^u) = exp(lambda u^2 / 2)
inline double phi(double lambda, double x) {
    if (!(lambda > 0.0)) throw std::invalid_argument("phi: lambda must be positive");
    if (!(x > 0.0)) throw std::domain_error("phi: argument must be positive");
    const double u = std::log(x);
    return std::exp(0.5 * lambda * u * u);
}

inline double phi_of_exp(double lambda, double u) {
    return std::exp(0.5 * lambda * u * u);
}

// phi(e^x) + e^{2/lambda} psi(y) - e^x y. Nonnegative for all x real, y >= 0;
// may overflow to +inf for extreme x, which preserves the sign contract.
inline double young_gap(double lambda, double x, double y) {
    if (!(lambda > 0.0)) throw std::invalid_argument("young_gap: lambda must be positive");
    if (y < 0.0) throw std::domain_error("young_gap: y must be nonnegative");
    return phi_of_exp(lambda, x) + std::exp(2.0 / lambda) * psi(lambda, y) - std::exp(x) * y;
}

// Same gap divided by max(1, phi(e^x), e^{2/lambda} psi(y)), evaluated in log
// space so the sweep over x in [-20, 20] and lambda up to 10 never overflows.
inline double young_gap_relative(double lambda, double x, double y) {
    if (!(lambda > 0.0)) throw std::invalid_argument("young_gap_relative: lambda must be positive");
    if (y < 0.0) throw std::domain_error("young_gap_relative: y must be nonnegative");
    const double log_phi = 0.5 * lambda * x * x;
    const double log_psi = y > 0.0 ? 2.0 / lambda + log_psi_from_log(lambda, std::log(y))
                                   : -std::numeric_limits<double>::infinity();
    const double log_prod = y > 0.0 ? x + std::log(y) : -std::numeric_limits<double>::infinity();
    const double log_scale = std::max(0.0, std::max(log_phi, log_psi));
    double rel = std::exp(log_phi - log_scale);
    if (y > 0.0) rel += std::exp(log_psi - log_scale) - std::exp(log_prod - log_scale);
    return rel;
}

struct SandwichValues {
    double lower;      // x
    double psi;        // psi_lambda(x)
    double upper_eps;  // e^{1/(2 eps lambda)} x (x+1)^eps
};

// x <= psi_lambda(x) <= e^{1/(2 eps lambda)} x (x+1)^eps for every eps > 0
inline SandwichValues remark_sandwich(double lambda, double eps, double x) {
    if (!(lambda > 0.0)) throw std::invalid_argument("remark_sandwich: lambda must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("remark_sandwich: eps must be positive");
    if (x < 0.0) throw std::domain_error("remark_sandwich: x must be nonnegative");
    const double upper =
        x == 0.0 ? 0.0 : std::exp(1.0 / (2.0 * eps * lambda) + std::log(x) + eps * std::log1p(x));
    return {x, psi(lambda, x), upper};
}

}  // namespace bsdelab
