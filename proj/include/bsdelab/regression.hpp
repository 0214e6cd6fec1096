#pragma once

#include <span>
#include <string>
#include <vector>

#include "bsdelab/core.hpp"

namespace bsdelab {

// Conditional-expectation estimator configuration: polynomials of the state
// up to a total degree, or indicator bins over an interval (d = 1 only).
class RegressionBasis {
public:
    enum class Family { polynomial, indicator };

    static RegressionBasis polynomial(std::size_t degree) {
        if (degree < 1) throw std::invalid_argument("RegressionBasis: degree must be >= 1");
        RegressionBasis b;
        b.family_ = Family::polynomial;
        b.degree_ = degree;
        return b;
    }

    static RegressionBasis indicator(std::size_t bins, double lo, double hi) {
        if (bins < 2) throw std::invalid_argument("RegressionBasis: need at least 2 bins");
        if (!(lo < hi)) throw std::invalid_argument("RegressionBasis: empty bin range");
        RegressionBasis b;
        b.family_ = Family::indicator;
        b.bins_ = bins;
        b.lo_ = lo;
        b.hi_ = hi;
        return b;
    }

    Family family() const { return family_; }
    std::size_t degree() const { return degree_; }
    std::size_t size(std::size_t dim) const;
    std::string describe() const;

    // writes the basis functions evaluated at `state` (dim entries) into out
    void evaluate(std::span<const double> state, std::span<double> out) const;

private:
    RegressionBasis() = default;
    Family family_ = Family::polynomial;
    std::size_t degree_ = 4;
    std::size_t bins_ = 0;
    double lo_ = 0.0, hi_ = 0.0;
    mutable std::vector<std::vector<unsigned>> exponents_;  // cached multi-indices
    mutable std::size_t exponents_dim_ = 0;
    void ensure_exponents(std::size_t dim) const;
};

struct RegressionOutput {
    std::vector<std::vector<double>> fitted;  // one vector per target, length M
    std::vector<std::vector<double>> coefficients;
    double smallest_singular_value = 0.0;
    bool ridge_used = false;
    bool degenerate_state = false;  // all states identical; fit reduces to the mean
};

// Ordinary least squares of each target on the basis at the given states
// (states is M x dim, row-major). One normal matrix is assembled and
// factored for all targets. Falls back to ridge when the normal matrix has
// a singular value below 1e-10.
RegressionOutput regress(const RegressionBasis& basis, std::size_t dim,
                         std::span<const double> states,
                         const std::vector<std::span<const double>>& targets);

}  // namespace bsdelab
