#pragma once

// Plot-ready TSV series. Lines starting with '#' carry metadata such as the
// shaded hypothesis masses; the first other line is the column header.
//
//   loss                 step losses of a0 and a1 over theta
//   prior-decomposition  pi(theta), pi(theta | H0), pi(theta | H1)
//   improper-prior       the improper prior and the resulting posterior

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bfdecide/compute.hpp"
#include "bfdecide/errors.hpp"
#include "bfdecide/json_io.hpp"

namespace bfd::plot {

using io::json;

inline constexpr long kDefaultPoints = 401;

namespace detail {

struct Range {
    double lo = -4.0;
    double hi = 4.0;
};

inline void widen(Range& r, double x) {
    if (!std::isfinite(x)) return;
    r.lo = std::min(r.lo, x);
    r.hi = std::max(r.hi, x);
}

inline Range range_for(const json& req, const ParameterSpace& space, const std::vector<double>& anchors) {
    if (io::has(req, "range")) {
        const auto v = io::numbers(req, "range", "request");
        if (v.size() != 2 || !(v[0] < v[1]) || !std::isfinite(v[0]) || !std::isfinite(v[1]))
            throw ValidationError("request.range must be [lo, hi] with lo < hi");
        return {v[0], v[1]};
    }
    if (space.bounded()) return {space.lower, space.upper};
    Range r{kInf, -kInf};
    for (double a : anchors) widen(r, a);
    if (!(r.lo < r.hi)) r = {r.lo - 1.0, r.lo + 1.0};
    if (!std::isfinite(r.lo)) r = {-4.0, 4.0};
    const double pad = 0.1 * (r.hi - r.lo);
    return {std::max(space.lower, r.lo - pad), std::min(space.upper, r.hi + pad)};
}

inline std::vector<double> points(const json& req, const Range& r, const std::vector<double>& borders) {
    const long n = io::has(req, "points") ? io::integer(req, "points", "request") : kDefaultPoints;
    if (n < 2 || n > 100000) throw ValidationError("request.points must lie in [2, 100000]");
    std::vector<double> x = make_grid(r.lo, r.hi, static_cast<std::size_t>(n), false);
    for (double b : borders)
        if (b > r.lo && b < r.hi) x.push_back(b);
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    return x;
}

inline std::vector<double> borders(const HypothesisPair& p) {
    std::vector<double> b = p.theta0.finite_endpoints();
    for (double e : p.theta1.finite_endpoints()) b.push_back(e);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

inline std::vector<double> density_anchors(const Density& d) {
    if (const auto* n = std::get_if<NormalDensity>(&d)) {
        const double s = std::sqrt(n->sigma2);
        return {n->mu - 4.0 * s, n->mu + 4.0 * s};
    }
    const Interval s = support(d);
    return {s.lo, s.hi};
}

inline std::string row(std::initializer_list<double> v) {
    std::string out;
    bool first = true;
    for (double x : v) {
        if (!first) out += "\t";
        out += compute::cell(x);
        first = false;
    }
    return out + "\n";
}

} // namespace detail

inline std::string loss_figure(const json& req) {
    const SamplingModel m = io::has(req, "model") ? io::model_from_json(req.at("model"), "request.model")
                                                  : SamplingModel(NormalKnownVariance());
    const ParameterSpace space = io::has(req, "model") ? parameter_space(m) : ParameterSpace::real_line();
    const HypothesisPair pair = io::pair_from_json(io::field(req, "hypotheses", "request"), "request.hypotheses", space);
    std::vector<SimplifiedLoss> losses;
    std::string head = "# figure: loss\n";
    if (io::has(req, "loss")) {
        const json& l = req.at("loss");
        losses.emplace_back(io::number(l, "k0", "request.loss"), io::number(l, "k1", "request.loss"));
        head += "# k0 = " + compute::cell(losses[0].k0) + "\n# k1 = " + compute::cell(losses[0].k1) + "\n";
    } else {
        const RobustLossInterval iv = io::interval_k_from_json(req, "request");
        losses.emplace_back(1.0, iv.k_lower);
        losses.emplace_back(1.0, iv.k_upper);
        head += "# k0 = " + compute::cell(1.0) + "\n# k1 in [" + compute::cell(iv.k_lower) + ", " + compute::cell(iv.k_upper) + "]\n";
    }
    const auto b = detail::borders(pair);
    const auto r = detail::range_for(req, pair.space, b);
    std::string out = head;
    out += losses.size() == 1 ? "theta\tloss_a0\tloss_a1\n" : "theta\tloss_a0\tloss_a1_k_lower\tloss_a1_k_upper\n";
    auto emit = [&](double x, Membership mem) {
        const double a0 = mem == Membership::InTheta1 ? losses[0].k0 : 0.0;
        std::vector<double> a1;
        for (const auto& l : losses) a1.push_back(mem == Membership::InTheta0 ? l.k1 : 0.0);
        out += compute::cell(x) + "\t" + compute::cell(a0);
        for (double v : a1) out += "\t" + compute::cell(v);
        out += "\n";
    };
    for (double x : detail::points(req, r, b)) {
        const Membership mem = membership(pair, x);
        const bool border = std::binary_search(b.begin(), b.end(), x);
        if (border) {
            // Vertical segment of the step: left limit, value at the border, right limit.
            emit(x, membership(pair, std::nextafter(x, -kInf)));
            emit(x, mem);
            emit(x, membership(pair, std::nextafter(x, kInf)));
        } else {
            emit(x, mem);
        }
    }
    return out;
}

inline std::string prior_decomposition_figure(const json& req) {
    const compute::ModelSpec s = compute::model_spec(req);
    const HypothesisPair pair = compute::require_pair(s);
    const Decomposition d = decompose(s.prior, pair);
    std::vector<double> anchors = detail::borders(pair);
    if (const auto* p = std::get_if<ProperPrior>(&s.prior.kind))
        for (double a : detail::density_anchors(p->base)) anchors.push_back(a);
    const auto r = detail::range_for(req, pair.space, anchors);
    const PriorKernel k = resolve(s.prior, pair.space);
    std::string out = "# figure: prior-decomposition\n";
    out += "# mass H0 = " + compute::cell(d.p0) + "\n# mass H1 = " + compute::cell(d.p1) + "\n";
    out += "theta\tprior\twithin_h0\twithin_h1\n";
    for (double x : detail::points(req, r, detail::borders(pair))) {
        const double prior = std::exp(k.log_density(x));
        out += detail::row({x, prior, d.within0.pdf(x), d.within1.pdf(x)});
    }
    return out;
}

inline std::string improper_prior_figure(const json& req) {
    const compute::ModelSpec s = compute::model_spec(req);
    const HypothesisPair pair = compute::require_pair(s);
    const PosteriorSummary sum = analyze(s.model, s.prior, pair, compute::posterior_options(req));
    std::vector<double> anchors = detail::borders(pair);
    anchors.push_back(sum.posterior.mean() - 5.0 * sum.posterior.sd());
    anchors.push_back(sum.posterior.mean() + 5.0 * sum.posterior.sd());
    const auto r = detail::range_for(req, pair.space, anchors);
    const PriorKernel k = resolve(s.prior, pair.space);
    std::string out = "# figure: improper-prior\n";
    out += std::string("# prior kind = ") + kind_name(s.prior) + "\n";
    out += "# posterior mass H0 = " + compute::cell(sum.p0_post) + "\n# posterior mass H1 = " + compute::cell(sum.p1_post) + "\n";
    out += "theta\tprior\tposterior\n";
    for (double x : detail::points(req, r, detail::borders(pair)))
        out += detail::row({x, std::exp(k.log_density(x)), sum.posterior.pdf(x)});
    return out;
}

inline std::string figure(const std::string& name, const json& req) {
    if (name == "loss") return loss_figure(req);
    if (name == "prior-decomposition") return prior_decomposition_figure(req);
    if (name == "improper-prior") return improper_prior_figure(req);
    throw ValidationError("unknown figure '" + name + "' (expected loss, prior-decomposition or improper-prior)");
}

} // namespace bfd::plot
