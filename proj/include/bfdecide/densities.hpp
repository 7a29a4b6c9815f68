#pragma once

// Univariate density families used for priors and closed-form posteriors.
// Every family exposes log_pdf, mass over an interval union, its support and
// integration features (breakpoints plus a length scale for tail mapping).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <variant>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "bfdecide/errors.hpp"
#include "bfdecide/interval.hpp"
#include "bfdecide/quadrature.hpp"

namespace bfd {

// Where an integrand built from this density has structure.
struct Features {
    std::vector<double> breakpoints;
    double scale = kInf;

    void merge(const Features& other) {
        breakpoints.insert(breakpoints.end(), other.breakpoints.begin(), other.breakpoints.end());
        scale = std::min(scale, other.scale);
    }

    void add_points(const std::vector<double>& pts) { breakpoints.insert(breakpoints.end(), pts.begin(), pts.end()); }

    std::vector<double> sorted() const {
        std::vector<double> out;
        for (double b : breakpoints)
            if (std::isfinite(b)) out.push_back(b);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    QuadratureOptions quadrature_options() const {
        QuadratureOptions q;
        q.tail_scale = std::isfinite(scale) && scale > 0.0 ? scale : 1.0;
        return q;
    }
};

inline Features peak_features(double center, double sd) {
    Features f;
    for (double k : {-12.0, -8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 12.0}) f.breakpoints.push_back(center + k * sd);
    f.scale = sd;
    return f;
}

namespace stdnorm {

inline double cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
inline double ccdf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }
inline double log_pdf(double z) { return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi); }

// P(lo < Z < hi), evaluated on the side that avoids cancellation.
inline double mass(double lo, double hi) {
    if (!(lo < hi)) return 0.0;
    if (lo >= 0.0) return ccdf(lo) - ccdf(hi);
    if (hi <= 0.0) return cdf(hi) - cdf(lo);
    return 1.0 - cdf(lo) - ccdf(hi);
}

} // namespace stdnorm

struct NormalDensity {
    double mu = 0.0;
    double sigma2 = 1.0;

    NormalDensity() = default;
    NormalDensity(double m, double v) : mu(m), sigma2(v) {
        if (!std::isfinite(m)) throw DomainError("normal mean must be finite");
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("normal variance must be positive and finite");
    }

    double sd() const { return std::sqrt(sigma2); }
    double log_pdf(double x) const {
        const double z = (x - mu) / sd();
        return stdnorm::log_pdf(z) - std::log(sd());
    }
    double mass(const Interval& iv) const {
        if (iv.empty()) return 0.0;
        return stdnorm::mass((iv.lo - mu) / sd(), (iv.hi - mu) / sd());
    }
    Interval support() const { return Interval{}; }
    Features features() const { return peak_features(mu, sd()); }
    double mean() const { return mu; }
    double variance() const { return sigma2; }

    friend bool operator==(const NormalDensity&, const NormalDensity&) = default;
};

struct UniformDensity {
    double lower = 0.0;
    double upper = 1.0;

    UniformDensity() = default;
    UniformDensity(double a, double b) : lower(a), upper(b) {
        if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) throw DomainError("uniform requires finite lower < upper");
    }

    double log_pdf(double x) const {
        return (x >= lower && x <= upper) ? -std::log(upper - lower) : -kInf;
    }
    double mass(const Interval& iv) const {
        const Interval c = intersect(iv, support());
        return c.empty() ? 0.0 : (c.hi - c.lo) / (upper - lower);
    }
    Interval support() const { return Interval::closed(lower, upper); }
    Features features() const {
        Features f;
        f.breakpoints = {lower, upper};
        f.scale = upper - lower;
        return f;
    }
    double mean() const { return 0.5 * (lower + upper); }
    double variance() const { return (upper - lower) * (upper - lower) / 12.0; }

    friend bool operator==(const UniformDensity&, const UniformDensity&) = default;
};

struct BetaDensity {
    double alpha = 1.0;
    double beta = 1.0;

    BetaDensity() = default;
    BetaDensity(double a, double b) : alpha(a), beta(b) {
        if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
            throw DomainError("beta shape parameters must be positive and finite");
    }

    double log_norm() const { return std::lgamma(alpha) + std::lgamma(beta) - std::lgamma(alpha + beta); }
    double log_pdf(double x) const {
        if (x < 0.0 || x > 1.0) return -kInf;
        const double a = (alpha == 1.0) ? 0.0 : (alpha - 1.0) * std::log(x);
        const double b = (beta == 1.0) ? 0.0 : (beta - 1.0) * std::log1p(-x);
        return a + b - log_norm();
    }
    double cdf(double x) const { return x <= 0.0 ? 0.0 : x >= 1.0 ? 1.0 : boost::math::ibeta(alpha, beta, x); }
    double ccdf(double x) const { return x <= 0.0 ? 1.0 : x >= 1.0 ? 0.0 : boost::math::ibetac(alpha, beta, x); }
    double mass(const Interval& iv) const {
        const Interval c = intersect(iv, support());
        if (c.empty() || c.lo == c.hi) return 0.0;
        if (c.lo >= mean()) return ccdf(c.lo) - ccdf(c.hi);
        return cdf(c.hi) - cdf(c.lo);
    }
    Interval support() const { return Interval::closed(0.0, 1.0); }
    double mean() const { return alpha / (alpha + beta); }
    double variance() const {
        const double s = alpha + beta;
        return alpha * beta / (s * s * (s + 1.0));
    }
    Features features() const {
        Features f = peak_features(mean(), std::sqrt(variance()));
        f.breakpoints.push_back(0.0);
        f.breakpoints.push_back(1.0);
        return f;
    }

    friend bool operator==(const BetaDensity&, const BetaDensity&) = default;
};

// Tabulated density: linear interpolation between nodes, zero outside the hull.
struct GridDensity {
    std::vector<double> nodes;
    std::vector<double> values;

    GridDensity() = default;
    GridDensity(std::vector<double> x, std::vector<double> y) : nodes(std::move(x)), values(std::move(y)) {
        if (nodes.size() < 2 || nodes.size() != values.size())
            throw DomainError("grid density needs at least two nodes and one value per node");
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (!std::isfinite(nodes[i]) || !std::isfinite(values[i]) || values[i] < 0.0)
                throw DomainError("grid density nodes must be finite and values finite and nonnegative");
            if (i && !(nodes[i] > nodes[i - 1])) throw DomainError("grid density nodes must be strictly increasing");
        }
    }

    double pdf(double x) const {
        if (x < nodes.front() || x > nodes.back()) return 0.0;
        auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
        if (it == nodes.end()) return values.back();
        const std::size_t i = static_cast<std::size_t>(it - nodes.begin());
        const double w = (x - nodes[i - 1]) / (nodes[i] - nodes[i - 1]);
        return values[i - 1] + w * (values[i] - values[i - 1]);
    }
    double log_pdf(double x) const {
        const double p = pdf(x);
        return p > 0.0 ? std::log(p) : -kInf;
    }
    // Exact integral of the piecewise-linear interpolant.
    double mass(const Interval& iv) const {
        const Interval c = intersect(iv, support());
        if (c.empty() || c.lo == c.hi) return 0.0;
        double m = 0.0;
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            const double a = std::max(c.lo, nodes[i - 1]);
            const double b = std::min(c.hi, nodes[i]);
            if (b > a) m += 0.5 * (pdf(a) + pdf(b)) * (b - a);
        }
        return m;
    }
    Interval support() const { return Interval::closed(nodes.front(), nodes.back()); }
    Features features() const {
        Features f;
        f.breakpoints = nodes;
        f.scale = (nodes.back() - nodes.front()) / static_cast<double>(nodes.size());
        return f;
    }

    friend bool operator==(const GridDensity&, const GridDensity&) = default;
};

// Unnormalized tabulated log density with optional power-law tails.
// Inside the hull: linear interpolation of the log values. Beyond an edge e
// with declared exponent a: log p(e) - a * log(1 + |x - e|). Without a
// declared exponent the density is zero beyond that edge.
struct LogDensityTable {
    std::vector<double> nodes;
    std::vector<double> log_values;
    std::optional<double> left_tail_exponent;
    std::optional<double> right_tail_exponent;

    LogDensityTable() = default;
    LogDensityTable(std::vector<double> x, std::vector<double> ly, std::optional<double> left = std::nullopt,
                    std::optional<double> right = std::nullopt)
        : nodes(std::move(x)), log_values(std::move(ly)), left_tail_exponent(left), right_tail_exponent(right) {
        if (nodes.size() < 2 || nodes.size() != log_values.size())
            throw DomainError("log-density table needs at least two nodes and one value per node");
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (!std::isfinite(nodes[i]) || std::isnan(log_values[i]) || log_values[i] == kInf)
                throw DomainError("log-density table entries must be finite or -inf");
            if (i && !(nodes[i] > nodes[i - 1])) throw DomainError("log-density table nodes must be strictly increasing");
        }
    }

    double log_pdf(double x) const {
        if (x < nodes.front()) {
            if (!left_tail_exponent) return -kInf;
            return log_values.front() - *left_tail_exponent * std::log1p(nodes.front() - x);
        }
        if (x > nodes.back()) {
            if (!right_tail_exponent) return -kInf;
            return log_values.back() - *right_tail_exponent * std::log1p(x - nodes.back());
        }
        auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
        if (it == nodes.end()) return log_values.back();
        const std::size_t i = static_cast<std::size_t>(it - nodes.begin());
        const double l0 = log_values[i - 1], l1 = log_values[i];
        if (l0 == -kInf || l1 == -kInf) return (x == nodes[i - 1]) ? l0 : -kInf;
        const double w = (x - nodes[i - 1]) / (nodes[i] - nodes[i - 1]);
        return l0 + w * (l1 - l0);
    }

    // Closed form tail mass beyond an edge over distances [d0, d1] from it.
    static double tail_mass(double log_edge, double exponent, double d0, double d1) {
        if (!(d1 > d0)) return 0.0;
        const double scale = std::exp(log_edge);
        if (exponent == 1.0) return scale * (std::log1p(d1) - std::log1p(d0));
        const double k = 1.0 - exponent;
        const double f1 = std::isfinite(d1) ? std::pow(1.0 + d1, k) : (k < 0.0 ? 0.0 : kInf);
        return scale * (f1 - std::pow(1.0 + d0, k)) / k;
    }

    double mass(const Interval& iv) const {
        if (iv.empty() || iv.lo == iv.hi) return 0.0;
        double m = 0.0;
        const double lo = nodes.front(), hi = nodes.back();
        if (iv.lo < lo && left_tail_exponent)
            m += tail_mass(log_values.front(), *left_tail_exponent, std::max(0.0, lo - std::min(iv.hi, lo)), lo - iv.lo);
        if (iv.hi > hi && right_tail_exponent)
            m += tail_mass(log_values.back(), *right_tail_exponent, std::max(0.0, std::max(iv.lo, hi) - hi), iv.hi - hi);
        const Interval inner = intersect(iv, Interval::closed(lo, hi));
        if (!inner.empty() && inner.lo < inner.hi) {
            // exact integral of exp(linear) per segment
            for (std::size_t i = 1; i < nodes.size(); ++i) {
                const double a = std::max(inner.lo, nodes[i - 1]);
                const double b = std::min(inner.hi, nodes[i]);
                if (!(b > a)) continue;
                const double la = log_pdf(a), lb = log_pdf(b);
                if (la == -kInf || lb == -kInf) continue;
                const double d = lb - la;
                if (std::abs(d) < 1e-9) {
                    m += std::exp(0.5 * (la + lb)) * (b - a);
                } else {
                    m += (b - a) * std::exp(la) * std::expm1(d) / d;
                }
            }
        }
        return m;
    }

    Interval support() const {
        return Interval::make(left_tail_exponent ? -kInf : nodes.front(), right_tail_exponent ? kInf : nodes.back(), true,
                              true);
    }
    Features features() const {
        Features f;
        f.breakpoints = nodes;
        f.scale = std::max(1.0, (nodes.back() - nodes.front()) / 4.0);
        return f;
    }

    friend bool operator==(const LogDensityTable&, const LogDensityTable&) = default;
};

using Density = std::variant<NormalDensity, UniformDensity, BetaDensity, GridDensity, LogDensityTable>;

inline double log_pdf(const Density& d, double x) {
    return std::visit([x](const auto& v) { return v.log_pdf(x); }, d);
}
inline double pdf(const Density& d, double x) { return std::exp(log_pdf(d, x)); }
inline double mass(const Density& d, const Interval& iv) {
    return std::visit([&iv](const auto& v) { return v.mass(iv); }, d);
}
inline double mass(const Density& d, const IntervalUnion& u) {
    double m = 0.0;
    for (const auto& iv : u.intervals()) m += mass(d, iv);
    return m;
}
inline Interval support(const Density& d) {
    return std::visit([](const auto& v) { return v.support(); }, d);
}
inline Features features(const Density& d) {
    return std::visit([](const auto& v) { return v.features(); }, d);
}

inline const char* family_name(const Density& d) {
    static constexpr const char* names[] = {"normal", "uniform", "beta", "grid", "log_density_table"};
    return names[d.index()];
}

} // namespace bfd
