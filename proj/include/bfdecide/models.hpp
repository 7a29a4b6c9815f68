#pragma once

// Sampling models f(x | theta) given through sufficient statistics.
//
// Additive constants that do not depend on theta are dropped:
//   normal_known_variance: log f = -n (theta - mean)^2 / (2 sigma2)
//   binomial:              log f = s log(theta) + (n - s) log(1 - theta)
//   generic_loglik:        the tabulated values as given
// Evidence values reported elsewhere inherit these conventions.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bfdecide/densities.hpp"
#include "bfdecide/errors.hpp"
#include "bfdecide/hypotheses.hpp"

namespace bfd {

struct NormalKnownVariance {
    double sigma2 = 1.0;
    long n = 1;
    double mean = 0.0;

    NormalKnownVariance() = default;
    NormalKnownVariance(double s2, long count, double xbar) : sigma2(s2), n(count), mean(xbar) {
        if (!(s2 > 0.0) || !std::isfinite(s2)) throw DomainError("sigma2 must be positive and finite");
        if (count < 1) throw DomainError("sample size n must be at least 1");
        if (!std::isfinite(xbar)) throw DomainError("sample mean must be finite");
    }

    // Variance of the sample mean, sigma2 / n.
    double mean_variance() const { return sigma2 / static_cast<double>(n); }

    friend bool operator==(const NormalKnownVariance&, const NormalKnownVariance&) = default;
};

struct Binomial {
    long n = 1;
    long successes = 0;

    Binomial() = default;
    Binomial(long trials, long s) : n(trials), successes(s) {
        if (trials < 1) throw DomainError("binomial needs at least one trial");
        if (s < 0 || s > trials) throw DomainError("successes must lie in [0, n]");
    }

    friend bool operator==(const Binomial&, const Binomial&) = default;
};

// Tabulated log-likelihood; linear interpolation in log space between grid
// nodes and -inf outside the grid hull.
struct GenericLogLik {
    std::vector<double> grid;
    std::vector<double> loglik;
    std::optional<ParameterSpace> space;

    GenericLogLik() = default;
    GenericLogLik(std::vector<double> x, std::vector<double> ll, std::optional<ParameterSpace> sp = std::nullopt)
        : grid(std::move(x)), loglik(std::move(ll)), space(sp) {
        if (grid.size() < 2 || grid.size() != loglik.size())
            throw DomainError("generic log-likelihood needs at least two grid nodes and one value per node");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!std::isfinite(grid[i])) throw DomainError("grid nodes must be finite");
            if (std::isnan(loglik[i]) || loglik[i] == kInf) throw DomainError("log-likelihood values must be finite or -inf");
            if (i && !(grid[i] > grid[i - 1])) throw DomainError("grid must be strictly increasing");
        }
        if (std::all_of(loglik.begin(), loglik.end(), [](double v) { return v == -kInf; }))
            throw DomainError("log-likelihood is -inf everywhere");
    }

    friend bool operator==(const GenericLogLik&, const GenericLogLik&) = default;
};

using SamplingModel = std::variant<NormalKnownVariance, Binomial, GenericLogLik>;

inline const char* family_name(const SamplingModel& m) {
    static constexpr const char* names[] = {"normal_known_variance", "binomial", "generic_loglik"};
    return names[m.index()];
}

inline ParameterSpace parameter_space(const SamplingModel& model) {
    if (std::holds_alternative<Binomial>(model)) return ParameterSpace::unit_interval();
    if (const auto* g = std::get_if<GenericLogLik>(&model))
        return g->space ? *g->space : ParameterSpace(g->grid.front(), g->grid.back());
    return ParameterSpace::real_line();
}

namespace detail {

inline double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

inline double interpolate_log(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x < xs.front() || x > xs.back()) return -kInf;
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.end()) return ys.back();
    const std::size_t i = static_cast<std::size_t>(it - xs.begin());
    const double y0 = ys[i - 1], y1 = ys[i];
    if (x == xs[i - 1]) return y0;
    if (y0 == -kInf || y1 == -kInf) return -kInf;
    const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return y0 + w * (y1 - y0);
}

} // namespace detail

// Evaluates without the domain check; used inside integrands.
inline double log_likelihood_unchecked(const SamplingModel& model, double theta) {
    return std::visit(
        [theta](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, NormalKnownVariance>) {
                const double d = theta - m.mean;
                return -static_cast<double>(m.n) * d * d / (2.0 * m.sigma2);
            } else if constexpr (std::is_same_v<T, Binomial>) {
                if (theta < 0.0 || theta > 1.0) return -kInf;
                const double s = static_cast<double>(m.successes);
                const double f = static_cast<double>(m.n - m.successes);
                return detail::xlogy(s, theta) + detail::xlogy(f, 1.0 - theta);
            } else {
                return detail::interpolate_log(m.grid, m.loglik, theta);
            }
        },
        model);
}

inline double log_likelihood(const SamplingModel& model, double theta) {
    const ParameterSpace sp = parameter_space(model);
    if (std::isnan(theta) || !sp.contains(theta))
        throw DomainError("theta = " + format_bound(theta) + " lies outside the model's parameter space");
    return log_likelihood_unchecked(model, theta);
}

// Location and value of the largest log-likelihood (used as the log-space shift).
inline std::pair<double, double> likelihood_peak(const SamplingModel& model) {
    return std::visit(
        [&model](const auto& m) -> std::pair<double, double> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, NormalKnownVariance>) {
                return {m.mean, 0.0};
            } else if constexpr (std::is_same_v<T, Binomial>) {
                const double p = static_cast<double>(m.successes) / static_cast<double>(m.n);
                return {p, log_likelihood_unchecked(model, p)};
            } else {
                auto it = std::max_element(m.loglik.begin(), m.loglik.end());
                return {m.grid[static_cast<std::size_t>(it - m.loglik.begin())], *it};
            }
        },
        model);
}

inline Features features(const SamplingModel& model) {
    return std::visit(
        [](const auto& m) -> Features {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, NormalKnownVariance>) {
                return peak_features(m.mean, std::sqrt(m.mean_variance()));
            } else if constexpr (std::is_same_v<T, Binomial>) {
                const double nn = static_cast<double>(m.n);
                const double p = (static_cast<double>(m.successes) + 0.5) / (nn + 1.0);
                Features f = peak_features(static_cast<double>(m.successes) / nn, std::sqrt(p * (1.0 - p) / (nn + 1.0)));
                f.breakpoints.push_back(0.0);
                f.breakpoints.push_back(1.0);
                return f;
            } else {
                Features f;
                f.breakpoints = m.grid;
                f.scale = (m.grid.back() - m.grid.front()) / static_cast<double>(m.grid.size());
                return f;
            }
        },
        model);
}

// Adds `shift` to a generic model's table (other families unchanged).
inline SamplingModel shifted(const SamplingModel& model, double shift) {
    if (const auto* g = std::get_if<GenericLogLik>(&model)) {
        GenericLogLik copy = *g;
        for (auto& v : copy.loglik) v += shift;
        return copy;
    }
    return model;
}

} // namespace bfd
