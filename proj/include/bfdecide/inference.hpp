#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "bfdecide/densities.hpp"
#include "bfdecide/errors.hpp"
#include "bfdecide/hypotheses.hpp"
#include "bfdecide/models.hpp"
#include "bfdecide/priors.hpp"
#include "bfdecide/quadrature.hpp"

namespace bfd {

inline constexpr std::size_t kDefaultGridNodes = 4096;
inline constexpr double kGridHalfWidthSd = 12.0;

struct ClosedForm {
    std::variant<NormalDensity, BetaDensity> density;
};

struct GridRepresentation {
    std::vector<double> nodes;
    std::vector<double> density;  // continuous part; atoms are listed separately
    std::vector<std::pair<double, double>> atoms;  // (location, posterior probability)
};

struct PosteriorOptions {
    bool force_grid = false;
    std::size_t grid_nodes = kDefaultGridNodes;
    // Extra points where the grid is refined and integration panels are split.
    std::vector<double> breakpoints;
};

class Posterior {
public:
    using Representation = std::variant<ClosedForm, GridRepresentation>;

    const Representation& representation() const noexcept { return rep_; }
    bool closed_form() const noexcept { return std::holds_alternative<ClosedForm>(rep_); }
    // log of the integrated likelihood times prior; not defined for improper priors.
    const std::optional<double>& evidence_log() const noexcept { return evidence_log_; }
    bool improper_prior() const noexcept { return improper_prior_; }
    const ParameterSpace& space() const noexcept { return space_; }
    double mean() const noexcept { return mean_; }
    double sd() const noexcept { return sd_; }

    double mass(const IntervalUnion& u) const {
        const IntervalUnion set = intersect(u, space_.as_union());
        if (const auto* cf = std::get_if<ClosedForm>(&rep_))
            return std::visit([&set](const auto& d) { return bfd::mass(Density{d}, set); }, cf->density);
        double m = 0.0;
        if (continuous_mass_ > 0.0) {
            auto f = [this](double x) { return std::exp(log_kernel_(x) - shift_); };
            m = integrate(f, set, features_.sorted(), features_.quadrature_options()).value;
        }
        for (const auto& [loc, w] : atom_kernels_)
            if (set.contains(loc)) m += w;
        return m / total_;
    }

    // Density of the continuous part (integrates to one minus the atom mass).
    double pdf(double x) const {
        if (!space_.contains(x)) return 0.0;
        if (const auto* cf = std::get_if<ClosedForm>(&rep_))
            return std::visit([x](const auto& d) { return std::exp(d.log_pdf(x)); }, cf->density);
        return std::exp(log_kernel_(x) - shift_) / total_;
    }

    const Features& features() const noexcept { return features_; }

private:
    friend Posterior posterior_update(const SamplingModel&, const Prior&, const PosteriorOptions&);

    Representation rep_;
    std::optional<double> evidence_log_;
    bool improper_prior_ = false;
    ParameterSpace space_;
    double mean_ = 0.0;
    double sd_ = 0.0;
    std::function<double(double)> log_kernel_;
    double shift_ = 0.0;
    double continuous_mass_ = 0.0;
    double total_ = 1.0;
    std::vector<std::pair<double, double>> atom_kernels_;
    Features features_;
};

namespace detail {

inline std::optional<ClosedForm> conjugate(const SamplingModel& model, const Prior& prior, double& evidence_log,
                                           bool& has_evidence) {
    const ParameterSpace space = parameter_space(model);
    has_evidence = false;
    if (const auto* nm = std::get_if<NormalKnownVariance>(&model)) {
        if (!(space == ParameterSpace::real_line())) return std::nullopt;
        const double vm = nm->mean_variance();
        if (std::holds_alternative<ImproperFlat>(prior.kind)) return ClosedForm{NormalDensity(nm->mean, vm)};
        if (const auto* p = std::get_if<ProperPrior>(&prior.kind)) {
            const auto* nd = std::get_if<NormalDensity>(&p->base);
            if (!nd || p->truncation) return std::nullopt;
            const double v = 1.0 / (1.0 / nd->sigma2 + 1.0 / vm);
            const double m = v * (nd->mu / nd->sigma2 + nm->mean / vm);
            evidence_log = 0.5 * std::log(2.0 * std::numbers::pi * vm) + NormalDensity(nd->mu, nd->sigma2 + vm).log_pdf(nm->mean);
            has_evidence = true;
            return ClosedForm{NormalDensity(m, v)};
        }
        return std::nullopt;
    }
    if (const auto* bm = std::get_if<Binomial>(&model)) {
        const auto* p = std::get_if<ProperPrior>(&prior.kind);
        if (!p || p->truncation) return std::nullopt;
        const auto* bd = std::get_if<BetaDensity>(&p->base);
        if (!bd) return std::nullopt;
        const BetaDensity post(bd->alpha + static_cast<double>(bm->successes),
                               bd->beta + static_cast<double>(bm->n - bm->successes));
        evidence_log = post.log_norm() - bd->log_norm();
        has_evidence = true;
        return ClosedForm{post};
    }
    return std::nullopt;
}

} // namespace detail

// Posterior of theta given the data summarized by `model`.
inline Posterior posterior_update(const SamplingModel& model, const Prior& prior, const PosteriorOptions& opt = {}) {
    Posterior post;
    post.space_ = parameter_space(model);
    const PriorKernel pk = resolve(prior, post.space_);
    post.improper_prior_ = !pk.proper;

    auto loglik = [model](double x) { return log_likelihood_unchecked(model, x); };
    post.log_kernel_ = [loglik, lp = pk.log_density](double x) {
        const double a = lp(x);
        if (a == -kInf) return -kInf;
        const double b = loglik(x);
        return b == -kInf ? -kInf : a + b;
    };
    post.features_ = features(model);
    post.features_.merge(pk.features);
    post.features_.add_points(opt.breakpoints);
    post.features_.add_points(post.space_.as_union().finite_endpoints());

    double ev = 0.0;
    bool has_ev = false;
    if (!opt.force_grid) {
        if (auto cf = detail::conjugate(model, prior, ev, has_ev)) {
            post.rep_ = *cf;
            if (has_ev) post.evidence_log_ = ev;
            std::visit(
                [&post](const auto& d) {
                    post.mean_ = d.mean();
                    post.sd_ = std::sqrt(d.variance());
                },
                cf->density);
            return post;
        }
    }

    // Numerical route: normalize likelihood x prior by adaptive quadrature.
    const std::vector<double> probes = [&] {
        std::vector<double> p = post.features_.sorted();
        p.push_back(likelihood_peak(model).first);
        return p;
    }();
    double shift = -kInf;
    for (double x : probes)
        if (post.space_.contains(x)) {
            const double v = post.log_kernel_(x);
            if (std::isfinite(v)) shift = std::max(shift, v);  // an integrable pole is +inf at the border
        }
    for (const auto& [loc, w] : pk.atoms)
        if (post.space_.contains(loc)) shift = std::max(shift, std::log(w) + loglik(loc));
    if (!std::isfinite(shift))
        throw DegenerateEvidence("likelihood times prior vanishes at every probe point");
    post.shift_ = shift;

    auto kernel = [&post](double x) { return std::exp(post.log_kernel_(x) - post.shift_); };
    const auto qopt = post.features_.quadrature_options();
    const auto sorted = post.features_.sorted();
    const IntervalUnion sp = post.space_.as_union();
    try {
        if (pk.continuous_weight > 0.0) post.continuous_mass_ = integrate(kernel, sp, sorted, qopt).value;
    } catch (const NumericalError& e) {
        if (!pk.proper) throw ImproperPosteriorError(std::string("posterior could not be normalized: ") + e.what());
        throw;
    }
    if (!std::isfinite(post.continuous_mass_))
        throw ImproperPosteriorError("likelihood times prior is not integrable over the parameter space");
    for (const auto& [loc, w] : pk.atoms) {
        if (!post.space_.contains(loc)) continue;
        post.atom_kernels_.emplace_back(loc, std::exp(std::log(w) + loglik(loc) - shift));
    }
    double total = post.continuous_mass_;
    for (const auto& a : post.atom_kernels_) total += a.second;
    if (!(total > 0.0)) throw DegenerateEvidence("likelihood times prior integrates to zero");
    post.total_ = total;
    if (pk.proper) post.evidence_log_ = std::log(total) + shift;

    // Pilot moments of the posterior.
    double m1 = 0.0, m2 = 0.0;
    if (post.continuous_mass_ > 0.0) {
        m1 = integrate([&](double x) { return x * kernel(x); }, sp, sorted, qopt).value;
    }
    for (const auto& [loc, w] : post.atom_kernels_) m1 += loc * w;
    post.mean_ = m1 / total;
    if (post.continuous_mass_ > 0.0) {
        m2 = integrate(
                 [&](double x) {
                     const double d = x - post.mean_;
                     return d * d * kernel(x);
                 },
                 sp, sorted, qopt)
                 .value;
    }
    for (const auto& [loc, w] : post.atom_kernels_) m2 += (loc - post.mean_) * (loc - post.mean_) * w;
    post.sd_ = std::sqrt(std::max(0.0, m2 / total));

    // Tabulation: mean +/- 12 sd clipped to the space, refined at structural points.
    GridRepresentation grid;
    double lo = post.mean_ - kGridHalfWidthSd * post.sd_;
    double hi = post.mean_ + kGridHalfWidthSd * post.sd_;
    if (!(hi > lo)) {
        lo = post.mean_ - 1.0;
        hi = post.mean_ + 1.0;
    }
    lo = std::max(lo, post.space_.lower);
    hi = std::min(hi, post.space_.upper);
    const std::size_t n = std::max<std::size_t>(opt.grid_nodes, 2);
    std::vector<double> nodes;
    nodes.reserve(n + 3 * sorted.size());
    for (std::size_t i = 0; i < n; ++i)
        nodes.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    for (double b : sorted) {
        if (b <= lo || b >= hi) continue;
        nodes.push_back(std::nextafter(b, -kInf));
        nodes.push_back(b);
        nodes.push_back(std::nextafter(b, kInf));
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    grid.density.reserve(nodes.size());
    for (double x : nodes) grid.density.push_back(kernel(x) / total);
    grid.nodes = std::move(nodes);
    for (const auto& [loc, w] : post.atom_kernels_) grid.atoms.emplace_back(loc, w / total);
    post.rep_ = std::move(grid);
    return post;
}

struct PosteriorSummary {
    Posterior posterior;
    double p0_post = 0.0;
    double p1_post = 0.0;
};

inline std::pair<double, double> posterior_hypothesis_probabilities(const Posterior& post, const HypothesisPair& pair) {
    return {post.mass(pair.theta0), post.mass(pair.theta1)};
}

inline PosteriorSummary analyze(const SamplingModel& model, const Prior& prior, const HypothesisPair& pair,
                                PosteriorOptions opt = {}) {
    for (double e : pair.theta0.finite_endpoints()) opt.breakpoints.push_back(e);
    for (double e : pair.theta1.finite_endpoints()) opt.breakpoints.push_back(e);
    PosteriorSummary s{posterior_update(model, prior, opt)};
    std::tie(s.p0_post, s.p1_post) = posterior_hypothesis_probabilities(s.posterior, pair);
    return s;
}

// Trapezoid integral of a tabulated posterior (used to check grid normalization).
inline double grid_total_mass(const GridRepresentation& g) {
    double m = 0.0;
    for (std::size_t i = 1; i < g.nodes.size(); ++i)
        m += 0.5 * (g.density[i] + g.density[i - 1]) * (g.nodes[i] - g.nodes[i - 1]);
    for (const auto& a : g.atoms) m += a.second;
    return m;
}

} // namespace bfd
