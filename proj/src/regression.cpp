#include "bsdelab/regression.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bsdelab {

namespace {

// cyclic Jacobi eigenvalues of a small symmetric matrix, ascending
std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t p) {
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j) off += a[i * p + j] * a[i * p + j];
        if (off < 1e-300) break;
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = i + 1; j < p; ++j) {
                const double apq = a[i * p + j];
                if (apq == 0.0) continue;
                const double app = a[i * p + i];
                const double aqq = a[j * p + j];
                const double theta = 0.5 * (aqq - app) / apq;
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < p; ++k) {
                    const double aik = a[k * p + i];
                    const double ajk = a[k * p + j];
                    a[k * p + i] = c * aik - s * ajk;
                    a[k * p + j] = s * aik + c * ajk;
                }
                for (std::size_t k = 0; k < p; ++k) {
                    const double aik = a[i * p + k];
                    const double ajk = a[j * p + k];
                    a[i * p + k] = c * aik - s * ajk;
                    a[j * p + k] = s * aik + c * ajk;
                }
            }
        }
    }
    std::vector<double> eig(p);
    for (std::size_t i = 0; i < p; ++i) eig[i] = a[i * p + i];
    std::sort(eig.begin(), eig.end());
    return eig;
}

// in-place Cholesky; returns false on a non-positive pivot
bool cholesky(std::vector<double>& a, std::size_t p) {
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * p + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * p + k] * a[j * p + k];
            if (i == j) {
                if (!(s > 0.0)) return false;
                a[i * p + i] = std::sqrt(s);
            } else {
                a[i * p + j] = s / a[j * p + j];
            }
        }
    }
    return true;
}

std::vector<double> cholesky_solve(const std::vector<double>& l, std::size_t p,
                                   std::span<const double> rhs) {
    std::vector<double> x(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t k = 0; k < i; ++k) x[i] -= l[i * p + k] * x[k];
        x[i] /= l[i * p + i];
    }
    for (std::size_t i = p; i-- > 0;) {
        for (std::size_t k = i + 1; k < p; ++k) x[i] -= l[k * p + i] * x[k];
        x[i] /= l[i * p + i];
    }
    return x;
}

}  // namespace

void RegressionBasis::ensure_exponents(std::size_t dim) const {
    if (exponents_dim_ == dim && !exponents_.empty()) return;
    exponents_.clear();
    // multi-indices grouped by total degree 0, 1, ..., degree_
    std::vector<unsigned> idx(dim, 0);
    auto emit = [&](auto&& self, std::size_t pos, unsigned remaining) -> void {
        if (pos + 1 == dim) {
            idx[pos] = remaining;
            exponents_.push_back(idx);
            return;
        }
        for (unsigned e = 0; e <= remaining; ++e) {
            idx[pos] = e;
            self(self, pos + 1, remaining - e);
        }
    };
    for (unsigned total = 0; total <= degree_; ++total) emit(emit, 0, total);
    exponents_dim_ = dim;
}

std::size_t RegressionBasis::size(std::size_t dim) const {
    if (family_ == Family::indicator) {
        if (dim != 1) throw std::invalid_argument("RegressionBasis: indicator bins require d=1");
        return bins_;
    }
    ensure_exponents(dim);
    return exponents_.size();
}

std::string RegressionBasis::describe() const {
    std::ostringstream s;
    if (family_ == Family::polynomial) {
        s << "polynomial[degree=" << degree_ << "]";
    } else {
        s << "indicator[bins=" << bins_ << ",lo=" << lo_ << ",hi=" << hi_ << "]";
    }
    return s.str();
}

void RegressionBasis::evaluate(std::span<const double> state, std::span<double> out) const {
    if (family_ == Family::indicator) {
        const double width = (hi_ - lo_) / static_cast<double>(bins_);
        auto bin = static_cast<std::ptrdiff_t>(std::floor((state[0] - lo_) / width));
        bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(bins_) - 1);
        std::fill(out.begin(), out.end(), 0.0);
        out[static_cast<std::size_t>(bin)] = 1.0;
        return;
    }
    ensure_exponents(state.size());
    for (std::size_t j = 0; j < exponents_.size(); ++j) {
        double v = 1.0;
        for (std::size_t k = 0; k < state.size(); ++k) {
            for (unsigned e = 0; e < exponents_[j][k]; ++e) v *= state[k];
        }
        out[j] = v;
    }
}

RegressionOutput regress(const RegressionBasis& basis, std::size_t dim,
                         std::span<const double> states,
                         const std::vector<std::span<const double>>& targets) {
    if (dim < 1) throw std::invalid_argument("regress: dimension must be >= 1");
    if (states.size() % dim != 0) throw std::invalid_argument("regress: state array size mismatch");
    const std::size_t m_count = states.size() / dim;
    if (m_count == 0) throw std::invalid_argument("regress: empty sample");
    for (const auto& t : targets)
        if (t.size() != m_count) throw std::invalid_argument("regress: target size mismatch");

    RegressionOutput out;
    out.fitted.resize(targets.size());
    out.coefficients.resize(targets.size());

    // Degenerate states (e.g. the first grid node, where every path sits at
    // the origin) make every regressor constant; the conditional expectation
    // is then the plain mean.
    bool degenerate = true;
    for (std::size_t m = 1; m < m_count && degenerate; ++m)
        for (std::size_t k = 0; k < dim; ++k)
            if (states[m * dim + k] != states[k]) {
                degenerate = false;
                break;
            }
    if (degenerate) {
        out.degenerate_state = true;
        out.smallest_singular_value = 0.0;
        for (std::size_t t = 0; t < targets.size(); ++t) {
            double sum = 0.0;
            for (double v : targets[t]) sum += v;
            const double mean = sum / static_cast<double>(m_count);
            out.fitted[t].assign(m_count, mean);
            out.coefficients[t].assign(basis.size(dim), 0.0);
            out.coefficients[t][0] = mean;
        }
        return out;
    }

    const std::size_t p = basis.size(dim);
    std::vector<double> gram(p * p, 0.0);
    std::vector<std::vector<double>> rhs(targets.size(), std::vector<double>(p, 0.0));
    std::vector<double> b(p);

    for (std::size_t m = 0; m < m_count; ++m) {
        basis.evaluate(states.subspan(m * dim, dim), b);
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = i; j < p; ++j) gram[i * p + j] += b[i] * b[j];
            for (std::size_t t = 0; t < targets.size(); ++t) rhs[t][i] += b[i] * targets[t][m];
        }
    }
    const double inv_m = 1.0 / static_cast<double>(m_count);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) {
            gram[i * p + j] *= inv_m;
            gram[j * p + i] = gram[i * p + j];
        }
    for (auto& r : rhs)
        for (double& v : r) v *= inv_m;

    const auto eig = symmetric_eigenvalues(gram, p);
    out.smallest_singular_value = std::max(eig.front(), 0.0);

    double trace = 0.0;
    for (std::size_t i = 0; i < p; ++i) trace += gram[i * p + i];

    std::vector<double> factor = gram;
    double ridge = 0.0;
    if (out.smallest_singular_value < 1e-10) {
        ridge = 1e-8 * trace;
        out.ridge_used = true;
    }
    for (int attempt = 0; attempt < 6; ++attempt) {
        factor = gram;
        if (ridge > 0.0)
            for (std::size_t i = 0; i < p; ++i) factor[i * p + i] += ridge;
        if (cholesky(factor, p)) break;
        ridge = ridge > 0.0 ? ridge * 100.0 : 1e-8 * std::max(trace, 1e-30);
        out.ridge_used = true;
        if (attempt == 5) throw numerical_error("regress: normal matrix not factorable");
    }

    for (std::size_t t = 0; t < targets.size(); ++t) {
        out.coefficients[t] = cholesky_solve(factor, p, rhs[t]);
        out.fitted[t].resize(m_count);
    }
    for (std::size_t m = 0; m < m_count; ++m) {
        basis.evaluate(states.subspan(m * dim, dim), b);
        for (std::size_t t = 0; t < targets.size(); ++t) {
            double v = 0.0;
            for (std::size_t i = 0; i < p; ++i) v += out.coefficients[t][i] * b[i];
            out.fitted[t][m] = v;
        }
    }
    return out;
}

}  // namespace bsdelab
