#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bfdecide/errors.hpp"
#include "bfdecide/hypotheses.hpp"
#include "bfdecide/models.hpp"
#include "bfdecide/priors.hpp"
#include "bfdecide/quadrature.hpp"

namespace bfd {

// Odds of H0 over H1. +inf is only produced through the degenerate flag.
struct OddsValue {
    double value = 1.0;
    bool degenerate = false;

    static OddsValue of(double v) {
        if (std::isnan(v) || v < 0.0) throw DomainError("odds must be nonnegative");
        if (std::isinf(v)) return {kInf, true};
        return {v, v == 0.0};
    }

    static OddsValue from_probabilities(double p0, double p1) {
        if (!(p0 >= 0.0) || !(p1 >= 0.0)) throw DomainError("probabilities must be nonnegative");
        if (p1 == 0.0) {
            if (p0 == 0.0) throw DegenerateOdds("both hypothesis probabilities are zero");
            return {kInf, true};
        }
        return {p0 / p1, p0 == 0.0};
    }

    static OddsValue from_p0(double p0) {
        if (!(p0 >= 0.0 && p0 <= 1.0)) throw DomainError("p0 must lie in [0, 1]");
        return from_probabilities(p0, 1.0 - p0);
    }

    bool finite_positive() const noexcept { return value > 0.0 && std::isfinite(value); }
    double probability_h0() const noexcept { return std::isinf(value) ? 1.0 : value / (1.0 + value); }

    friend bool operator==(const OddsValue&, const OddsValue&) = default;
};

struct ComputedHere {
    friend bool operator==(const ComputedHere&, const ComputedHere&) = default;
};
struct ImportedExternal {
    std::string source;
    friend bool operator==(const ImportedExternal&, const ImportedExternal&) = default;
};

enum class BfOrientation { H0OverH1, H1OverH0 };

struct BayesFactorValue {
    double value = 1.0;
    double log_value = 0.0;
    std::variant<ComputedHere, ImportedExternal> provenance;

    static BayesFactorValue from_log(double log_bf) {
        if (!std::isfinite(log_bf)) throw DegenerateEvidence("Bayes factor is zero or infinite");
        return {std::exp(log_bf), log_bf, ComputedHere{}};
    }

    // An externally reported BF, re-oriented to H0 over H1.
    static BayesFactorValue imported(double bf, std::string source, BfOrientation orientation = BfOrientation::H0OverH1) {
        if (!(bf > 0.0) || !std::isfinite(bf)) throw DomainError("imported Bayes factor must be positive and finite");
        const double lv = orientation == BfOrientation::H0OverH1 ? std::log(bf) : -std::log(bf);
        return {orientation == BfOrientation::H0OverH1 ? bf : 1.0 / bf, lv, ImportedExternal{std::move(source)}};
    }

    bool is_imported() const noexcept { return std::holds_alternative<ImportedExternal>(provenance); }
};

// log of the integral of f(x | theta) pi(theta | H) over the support of the
// within-hypothesis prior, using the convention constants of `models.hpp`.
inline double log_evidence(const SamplingModel& model, const WithinHypothesisPrior& within) {
    const ParameterSpace space = parameter_space(model);
    if (within.is_point()) {
        if (!space.contains(within.point())) return -kInf;
        return log_likelihood_unchecked(model, within.point());
    }
    const IntervalUnion domain = intersect(within.support(), space.as_union());
    if (domain.empty()) return -kInf;

    Features feat = features(model);
    feat.merge(within.features());
    const auto breaks = feat.sorted();

    auto log_kernel = [&](double x) {
        const double lp = within.log_pdf(x);
        if (lp == -kInf) return -kInf;
        const double ll = log_likelihood_unchecked(model, x);
        return ll == -kInf ? -kInf : lp + ll;
    };

    // Shift by the largest kernel value found at probe points inside the domain.
    std::vector<double> probes = breaks;
    probes.push_back(likelihood_peak(model).first);
    const double step = std::isfinite(feat.scale) ? feat.scale : 1.0;
    for (const auto& iv : domain.intervals()) {
        if (std::isfinite(iv.lo) && std::isfinite(iv.hi)) {
            for (int i = 0; i <= 16; ++i) probes.push_back(iv.lo + (iv.hi - iv.lo) * i / 16.0);
        } else if (std::isfinite(iv.lo)) {
            for (double k : {0.0, 1.0, 4.0, 16.0}) probes.push_back(iv.lo + k * step);
        } else if (std::isfinite(iv.hi)) {
            for (double k : {0.0, 1.0, 4.0, 16.0}) probes.push_back(iv.hi - k * step);
        } else {
            probes.push_back(0.0);
        }
    }
    double shift = -kInf;
    // Densities with an integrable pole (beta with a < 1) are infinite at the border; skip such probes.
    for (double x : probes)
        if (domain.contains(x) || (x > domain.lower() && x < domain.upper())) {
            const double v = log_kernel(x);
            if (std::isfinite(v)) shift = std::max(shift, v);
        }
    if (!std::isfinite(shift)) return -kInf;

    const auto r = integrate([&](double x) { return std::exp(log_kernel(x) - shift); }, domain, breaks,
                             feat.quadrature_options());
    if (!(r.value > 0.0)) return -kInf;
    return std::log(r.value) + shift;
}

// BF of H0 over H1 from the within-hypothesis priors alone.
inline BayesFactorValue bayes_factor(const SamplingModel& model, const WithinHypothesisPrior& within0,
                                     const WithinHypothesisPrior& within1) {
    const IntervalUnion overlap = intersect(within0.support(), within1.support());
    if (!overlap.empty())
        throw InvalidDecomposition("within-hypothesis supports overlap on " + to_string(overlap));
    const double l0 = log_evidence(model, within0);
    const double l1 = log_evidence(model, within1);
    if (l1 == -kInf) throw DegenerateEvidence("marginal likelihood under H1 is zero");
    if (l0 == -kInf) throw DegenerateEvidence("marginal likelihood under H0 is zero");
    return BayesFactorValue::from_log(l0 - l1);
}

inline BayesFactorValue bayes_factor(const SamplingModel& model, const Prior& prior, const HypothesisPair& pair) {
    if (!prior.is_decomposed()) {
        const ProperCheck chk = check_proper(prior, pair.space);
        if (!chk.proper()) throw ImproperPriorError("the overall prior is improper");
    }
    const Decomposition d = decompose(prior, pair);
    return bayes_factor(model, d.within0, d.within1);
}

inline std::optional<OddsValue> prior_odds(const Prior& prior, const HypothesisPair& pair) {
    const HypothesisMasses m = prior_hypothesis_probabilities(prior, pair);
    if (!m.defined()) return std::nullopt;
    return OddsValue::from_probabilities(*m.p0, *m.p1);
}

inline OddsValue posterior_odds_from_bf(const BayesFactorValue& bf, const std::optional<OddsValue>& prior_odds,
                                        bool allow_degenerate = false) {
    if (!prior_odds) throw ImproperPriorError("prior odds are not defined");
    if (!prior_odds->finite_positive() && !allow_degenerate)
        throw DegenerateOdds("prior odds must be finite and positive");
    if (std::isinf(prior_odds->value)) return {kInf, true};
    return OddsValue::of(bf.value * prior_odds->value);
}

inline BayesFactorValue bf_from_odds(const OddsValue& posterior_odds, const OddsValue& prior_odds) {
    if (!posterior_odds.finite_positive() || !prior_odds.finite_positive())
        throw DegenerateOdds("Bayes factor recovery needs finite positive odds");
    const double v = posterior_odds.value / prior_odds.value;
    if (!(v > 0.0) || !std::isfinite(v)) throw DegenerateOdds("Bayes factor underflows or overflows");
    return {v, std::log(v), ComputedHere{}};
}

} // namespace bfd
