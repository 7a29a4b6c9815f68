#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bfdecide/densities.hpp"
#include "bfdecide/errors.hpp"
#include "bfdecide/hypotheses.hpp"

namespace bfd {

// Masses closer to one than this are taken as normalized.
inline constexpr double kProperRelTol = 1e-6;
// Declared-proper densities with mass in [1 - tol, 1 + tol] are renormalized silently.
inline constexpr double kRenormalizeTol = 1e-3;

// A density restricted to a support set and renormalized there.
class RestrictedDensity {
public:
    RestrictedDensity(Density base, IntervalUnion support)
        : base_(std::move(base)), support_(intersect(std::move(support), IntervalUnion{bfd::support(base_)})) {
        mass_ = bfd::mass(base_, support_);
        if (!(mass_ > 0.0) || !std::isfinite(mass_))
            throw DomainError("density has no mass on " + to_string(support_));
        log_mass_ = std::log(mass_);
    }

    const Density& base() const noexcept { return base_; }
    const IntervalUnion& support() const noexcept { return support_; }
    // Mass of the base density on the support, before renormalization.
    double base_mass() const noexcept { return mass_; }

    double log_pdf(double x) const { return support_.contains(x) ? bfd::log_pdf(base_, x) - log_mass_ : -kInf; }
    double pdf(double x) const { return std::exp(log_pdf(x)); }

    double mass(const IntervalUnion& u) const {
        if (difference(support_, u).empty()) return 1.0;
        return bfd::mass(base_, intersect(support_, u)) / mass_;
    }

    Features features() const {
        Features f = bfd::features(base_);
        f.add_points(support_.finite_endpoints());
        return f;
    }

    friend bool operator==(const RestrictedDensity& a, const RestrictedDensity& b) {
        return a.base_ == b.base_ && a.support_ == b.support_;
    }

private:
    Density base_;
    IntervalUnion support_;
    double mass_ = 1.0;
    double log_mass_ = 0.0;
};

// pi(theta | H_i): a proper density on one hypothesis set, or a point mass
// for point hypotheses.
class WithinHypothesisPrior {
public:
    static WithinHypothesisPrior from_density(Density base, IntervalUnion support) {
        WithinHypothesisPrior w;
        w.density_.emplace(std::move(base), std::move(support));
        w.support_ = w.density_->support();
        return w;
    }

    static WithinHypothesisPrior point_mass(double at) {
        if (!std::isfinite(at)) throw DomainError("point mass location must be finite");
        WithinHypothesisPrior w;
        w.point_ = at;
        w.support_ = IntervalUnion{Interval::point(at)};
        return w;
    }

    bool is_point() const noexcept { return point_.has_value(); }
    double point() const { return point_.value(); }
    const RestrictedDensity& density() const { return density_.value(); }
    const IntervalUnion& support() const noexcept { return support_; }

    // Continuous density; a point mass has none.
    double log_pdf(double x) const { return density_ ? density_->log_pdf(x) : -kInf; }
    double pdf(double x) const { return std::exp(log_pdf(x)); }

    double mass(const IntervalUnion& u) const {
        if (point_) return u.contains(*point_) ? 1.0 : 0.0;
        return density_->mass(u);
    }

    Features features() const {
        if (point_) {
            Features f;
            f.breakpoints = {*point_};
            return f;
        }
        return density_->features();
    }

    friend bool operator==(const WithinHypothesisPrior&, const WithinHypothesisPrior&) = default;

private:
    WithinHypothesisPrior() = default;
    std::optional<RestrictedDensity> density_;
    std::optional<double> point_;
    IntervalUnion support_;
};

struct ProperPrior {
    Density base;
    // When set, the prior is `base` restricted to this set and renormalized.
    std::optional<IntervalUnion> truncation;

    friend bool operator==(const ProperPrior&, const ProperPrior&) = default;
};

// pi(theta) = c on the whole parameter space.
struct ImproperFlat {
    double c = 1.0;

    friend bool operator==(const ImproperFlat&, const ImproperFlat&) = default;
};

struct ImproperLogDensity {
    LogDensityTable table;

    friend bool operator==(const ImproperLogDensity&, const ImproperLogDensity&) = default;
};

// P(H0) together with the two within-hypothesis priors. A part whose weight
// is zero may be left out.
struct DecomposedPrior {
    double p0 = 0.5;
    std::optional<WithinHypothesisPrior> within0;
    std::optional<WithinHypothesisPrior> within1;

    friend bool operator==(const DecomposedPrior&, const DecomposedPrior&) = default;
};

struct Prior {
    std::variant<ProperPrior, ImproperFlat, ImproperLogDensity, DecomposedPrior> kind;

    static Prior proper(Density d, std::optional<IntervalUnion> truncation = std::nullopt) {
        return Prior{ProperPrior{std::move(d), std::move(truncation)}};
    }
    static Prior normal(double mu, double sigma2) { return proper(NormalDensity(mu, sigma2)); }
    static Prior uniform(double a, double b) { return proper(UniformDensity(a, b)); }
    static Prior beta(double a, double b) { return proper(BetaDensity(a, b)); }
    static Prior flat(double c) {
        if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("flat prior constant must be positive and finite");
        return Prior{ImproperFlat{c}};
    }
    static Prior log_density(LogDensityTable t) { return Prior{ImproperLogDensity{std::move(t)}}; }

    bool is_decomposed() const noexcept { return std::holds_alternative<DecomposedPrior>(kind); }

    friend bool operator==(const Prior&, const Prior&) = default;
};

inline const char* kind_name(const Prior& p) {
    static constexpr const char* names[] = {"proper", "improper_flat", "improper_log_density", "decomposed"};
    return names[p.kind.index()];
}

// ---------------------------------------------------------------------------
// Properness

enum class Properness { Proper, Improper };

struct ProperCheck {
    Properness status = Properness::Proper;
    double mass = 1.0;  // +inf when improper
    bool renormalized = false;
    std::optional<Prior> normalized;  // proper form integrating to one over the space

    bool proper() const noexcept { return status == Properness::Proper; }
};

inline ProperCheck check_proper(const Prior& prior, const ParameterSpace& space) {
    ProperCheck r;
    const IntervalUnion sp = space.as_union();
    if (const auto* p = std::get_if<ProperPrior>(&prior.kind)) {
        if (p->truncation) {
            const IntervalUnion s = intersect(*p->truncation, sp);
            r.mass = mass(p->base, s);
            if (!(r.mass > 0.0)) throw PriorMassError("truncated prior has no mass inside the parameter space");
            r.renormalized = std::abs(r.mass - 1.0) > kProperRelTol;
            r.normalized = Prior::proper(p->base, s);
            return r;
        }
        r.mass = mass(p->base, sp);
        const double dev = std::abs(r.mass - 1.0);
        if (dev > kRenormalizeTol)
            throw PriorMassError("prior mass over the parameter space is " + std::to_string(r.mass) +
                                 "; declare a truncation to restrict it");
        r.renormalized = dev > kProperRelTol;
        r.normalized = r.renormalized ? Prior::proper(p->base, sp) : prior;
        return r;
    }
    if (const auto* f = std::get_if<ImproperFlat>(&prior.kind)) {
        if (!space.bounded()) {
            r.status = Properness::Improper;
            r.mass = kInf;
            return r;
        }
        r.mass = f->c * space.width();
        r.renormalized = std::abs(r.mass - 1.0) > kProperRelTol;
        r.normalized = Prior::uniform(space.lower, space.upper);
        return r;
    }
    if (const auto* l = std::get_if<ImproperLogDensity>(&prior.kind)) {
        const auto& t = l->table;
        auto side = [&](bool extends, const std::optional<double>& exponent, const char* name) {
            if (!extends) return;
            if (!exponent)
                throw IndeterminateProperness(std::string("parameter space extends beyond the table on the ") + name +
                                              " but no tail exponent is declared");
        };
        side(space.lower < t.nodes.front(), t.left_tail_exponent, "left");
        side(space.upper > t.nodes.back(), t.right_tail_exponent, "right");
        const bool left_diverges = !std::isfinite(space.lower) && t.left_tail_exponent && *t.left_tail_exponent <= 1.0;
        const bool right_diverges = !std::isfinite(space.upper) && t.right_tail_exponent && *t.right_tail_exponent <= 1.0;
        if (left_diverges || right_diverges) {
            r.status = Properness::Improper;
            r.mass = kInf;
            return r;
        }
        r.mass = t.mass(space.as_interval());
        if (!std::isfinite(r.mass)) {
            r.status = Properness::Improper;
            r.mass = kInf;
            return r;
        }
        if (!(r.mass > 0.0)) throw PriorMassError("log-density table has no mass inside the parameter space");
        r.renormalized = std::abs(r.mass - 1.0) > kProperRelTol;
        r.normalized = Prior::proper(t, sp);
        return r;
    }
    const auto& d = std::get<DecomposedPrior>(prior.kind);
    if (!(d.p0 >= 0.0 && d.p0 <= 1.0)) throw DomainError("p0 must lie in [0, 1]");
    r.mass = 1.0;
    r.normalized = prior;
    return r;
}

// ---------------------------------------------------------------------------
// Resolved prior: the form inference and the Bayes factor integrate against.

struct PriorKernel {
    bool proper = true;
    // Log of the continuous part (normalized to its weight when proper).
    std::function<double(double)> log_density;
    Features features;
    // Point masses (location, weight) of a decomposed prior with a point hypothesis.
    std::vector<std::pair<double, double>> atoms;
    double continuous_weight = 1.0;
};

inline PriorKernel resolve(const Prior& prior, const ParameterSpace& space) {
    PriorKernel k;
    const ProperCheck chk = check_proper(prior, space);
    k.proper = chk.proper();
    if (!k.proper) {
        if (const auto* f = std::get_if<ImproperFlat>(&prior.kind)) {
            const double lc = std::log(f->c);
            k.log_density = [lc, space](double x) { return space.contains(x) ? lc : -kInf; };
        } else {
            const auto t = std::get<ImproperLogDensity>(prior.kind).table;
            k.log_density = [t, space](double x) { return space.contains(x) ? t.log_pdf(x) : -kInf; };
            k.features = t.features();
        }
        k.continuous_weight = kInf;
        return k;
    }
    const Prior& norm = *chk.normalized;
    if (const auto* p = std::get_if<ProperPrior>(&norm.kind)) {
        RestrictedDensity rd(p->base, p->truncation ? intersect(*p->truncation, space.as_union()) : space.as_union());
        k.features = rd.features();
        k.log_density = [rd](double x) { return rd.log_pdf(x); };
        return k;
    }
    const auto& d = std::get<DecomposedPrior>(norm.kind);
    const double p0 = d.p0, p1 = 1.0 - d.p0;
    std::optional<WithinHypothesisPrior> c0, c1;
    k.continuous_weight = 0.0;
    auto take = [&](const std::optional<WithinHypothesisPrior>& w, double weight, std::optional<WithinHypothesisPrior>& c,
                    const char* name) {
        if (weight == 0.0) return;
        if (!w) throw InvalidDecomposition(std::string("decomposed prior with positive weight on ") + name +
                                           " needs a within-hypothesis prior");
        k.features.merge(w->features());
        if (w->is_point()) {
            k.atoms.emplace_back(w->point(), weight);
        } else {
            c = w;
            k.continuous_weight += weight;
        }
    };
    take(d.within0, p0, c0, "H0");
    take(d.within1, p1, c1, "H1");
    k.log_density = [c0, c1, p0, p1](double x) {
        double v = 0.0;
        if (c0) v += p0 * c0->pdf(x);
        if (c1) v += p1 * c1->pdf(x);
        return v > 0.0 ? std::log(v) : -kInf;
    };
    return k;
}

// ---------------------------------------------------------------------------
// Hypothesis probabilities and decomposition

struct HypothesisMasses {
    std::optional<double> p0;  // nullopt: not defined (improper prior)
    std::optional<double> p1;

    bool defined() const noexcept { return p0.has_value() && p1.has_value(); }
};

inline HypothesisMasses prior_hypothesis_probabilities(const Prior& prior, const HypothesisPair& pair) {
    const ProperCheck chk = check_proper(prior, pair.space);
    if (!chk.proper()) return {};
    const Prior& norm = *chk.normalized;
    if (const auto* p = std::get_if<ProperPrior>(&norm.kind)) {
        RestrictedDensity rd(p->base, p->truncation ? intersect(*p->truncation, pair.space.as_union())
                                                    : pair.space.as_union());
        return {rd.mass(pair.theta0), rd.mass(pair.theta1)};
    }
    const auto& d = std::get<DecomposedPrior>(norm.kind);
    auto mix = [&](const IntervalUnion& set) {
        double m = 0.0;
        if (d.p0 > 0.0 && d.within0) m += d.p0 * d.within0->mass(set);
        if (d.p0 < 1.0 && d.within1) m += (1.0 - d.p0) * d.within1->mass(set);
        return m;
    };
    return {mix(pair.theta0), mix(pair.theta1)};
}

struct Decomposition {
    double p0 = 0.0;
    double p1 = 0.0;
    WithinHypothesisPrior within0;
    WithinHypothesisPrior within1;
};

inline Decomposition decompose(const Prior& prior, const HypothesisPair& pair) {
    if (const auto* d = std::get_if<DecomposedPrior>(&prior.kind)) {
        // The stored components must sit inside the pair's sets, in either order.
        auto inside = [](const WithinHypothesisPrior& w, const IntervalUnion& set) {
            const IntervalUnion rest = difference(w.support(), set);
            return rest.empty() || (!w.is_point() && rest.measure_zero());
        };
        double p0 = d->p0;
        auto w0 = d->within0;
        auto w1 = d->within1;
        const bool straight = (!w0 || inside(*w0, pair.theta0)) && (!w1 || inside(*w1, pair.theta1));
        if (!straight) {
            if ((!w0 || inside(*w0, pair.theta1)) && (!w1 || inside(*w1, pair.theta0))) {
                std::swap(w0, w1);
                p0 = 1.0 - p0;
            } else {
                throw InvalidDecomposition("the within-hypothesis priors do not lie inside the hypothesis sets");
            }
        }
        if (!w0 || p0 == 0.0) throw DegenerateHypothesisMass("H0", "prior probability of H0 is zero");
        if (!w1 || p0 == 1.0) throw DegenerateHypothesisMass("H1", "prior probability of H1 is zero");
        return {p0, 1.0 - p0, *w0, *w1};
    }
    const ProperCheck chk = check_proper(prior, pair.space);
    if (!chk.proper()) throw ImproperPriorError("an improper prior cannot be decomposed into prior odds");
    const auto& p = std::get<ProperPrior>(chk.normalized->kind);
    const IntervalUnion base_support = p.truncation ? intersect(*p.truncation, pair.space.as_union())
                                                    : pair.space.as_union();
    const RestrictedDensity overall(p.base, base_support);
    const double p0 = overall.mass(pair.theta0);
    const double p1 = overall.mass(pair.theta1);
    if (!(p0 > 0.0))
        throw DegenerateHypothesisMass("H0", pair.point_null()
                                                 ? "a continuous prior puts no mass on a point null; use a decomposed prior"
                                                 : "prior probability of H0 is zero");
    if (!(p1 > 0.0)) throw DegenerateHypothesisMass("H1", "prior probability of H1 is zero");
    return {p0, p1, WithinHypothesisPrior::from_density(p.base, intersect(base_support, pair.theta0)),
            WithinHypothesisPrior::from_density(p.base, intersect(base_support, pair.theta1))};
}

inline Prior recompose(double p0, std::optional<WithinHypothesisPrior> within0,
                       std::optional<WithinHypothesisPrior> within1) {
    if (!(p0 >= 0.0 && p0 <= 1.0)) throw DomainError("p0 must lie in [0, 1]");
    if (p0 > 0.0 && !within0) throw InvalidDecomposition("p0 > 0 requires a within-hypothesis prior for H0");
    if (p0 < 1.0 && !within1) throw InvalidDecomposition("p0 < 1 requires a within-hypothesis prior for H1");
    if (within0 && within1) {
        const IntervalUnion ov = intersect(within0->support(), within1->support());
        if (!ov.empty()) throw InvalidDecomposition("within-hypothesis supports overlap on " + to_string(ov));
    }
    return Prior{DecomposedPrior{p0, std::move(within0), std::move(within1)}};
}

// Density of a proper prior on the space (continuous part).
inline double prior_density(const Prior& prior, const ParameterSpace& space, double theta) {
    return std::exp(resolve(prior, space).log_density(theta));
}

} // namespace bfd
