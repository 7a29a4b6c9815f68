#pragma once

// Hypothesis-based decisions between two actions a0 and a1.
//
// With regret-form losses k0 (a0 when theta in Theta1) and k1 (a1 when theta
// in Theta0) the expected posterior losses are k0 P(H1|x) and k1 P(H0|x).
// Only k = k1 / k0 matters: with rho(k) = k * posterior odds, a0 is optimal
// when rho(k) > 1 and a1 when rho(k) < 1.
//
// For an interval [kl, ku] of plausible k values the rule is three-valued:
// a0 if rho(kl) >= 1, a1 if rho(ku) <= 1, and the decision is withheld when
// rho(kl) < 1 < rho(ku).

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bfdecide/bayes_factor.hpp"
#include "bfdecide/errors.hpp"
#include "bfdecide/hypotheses.hpp"
#include "bfdecide/inference.hpp"

namespace bfd {

// Relative distance from one within which rho counts as exactly one.
inline constexpr double kTieTolerance = 1e-12;

struct SimplifiedLoss {
    double k0 = 1.0;
    double k1 = 1.0;

    SimplifiedLoss() = default;
    SimplifiedLoss(double a, double b) : k0(a), k1(b) {
        if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
            throw DomainError("loss values k0 and k1 must be positive and finite");
    }
    double ratio() const { return k1 / k0; }
};

struct RobustLossInterval {
    double k_lower = 1.0;
    double k_upper = 1.0;

    RobustLossInterval() = default;
    RobustLossInterval(double lo, double hi) : k_lower(lo), k_upper(hi) {
        if (!(lo > 0.0) || !std::isfinite(lo) || !std::isfinite(hi))
            throw DomainError("loss-ratio bounds must be positive and finite");
        if (!(lo <= hi)) throw DomainError("loss-ratio interval requires kLower <= kUpper");
    }
    static RobustLossInterval precise(double k) { return {k, k}; }
    bool degenerate() const noexcept { return k_lower == k_upper; }
};

struct ActionPair {
    std::string a0;
    std::string a1;

    ActionPair() = default;
    ActionPair(std::string x, std::string y) : a0(std::move(x)), a1(std::move(y)) {
        if (a0.empty() || a1.empty()) throw ValidationError("action labels must be nonempty");
        if (a0 == a1) throw ValidationError("action labels must differ");
    }
};

enum class Outcome { ChooseA0, ChooseA1, Withheld, Indifferent };

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::ChooseA0: return "choose_a0";
        case Outcome::ChooseA1: return "choose_a1";
        case Outcome::Withheld: return "withheld";
        case Outcome::Indifferent: return "indifferent";
    }
    return "?";
}

inline Outcome outcome_from_string(const std::string& s) {
    if (s == "choose_a0") return Outcome::ChooseA0;
    if (s == "choose_a1") return Outcome::ChooseA1;
    if (s == "withheld") return Outcome::Withheld;
    if (s == "indifferent") return Outcome::Indifferent;
    throw ValidationError("unknown outcome '" + s + "'");
}

// Ways to resolve a withheld decision.
struct Recommendation {
    double flip_threshold = 1.0;
    // Narrowing [kl, ku] to either side of the threshold decides the problem.
    double raise_lower_to = 1.0;  // kl >= this gives a0
    double lower_upper_to = 1.0;  // ku <= this gives a1
    // Normal model with a conjugate prior: extra observations at the current
    // sample mean after which the interval rule decides.
    std::optional<long> additional_n_for_a0;
    std::optional<long> additional_n_for_a1;
    std::string advice =
        "collect more data or gather more information about the consequences of the errors to narrow [kLower, kUpper]";
};

struct DecisionOutcome {
    Outcome outcome = Outcome::Indifferent;
    double rho_lower = 1.0;
    double rho_upper = 1.0;
    OddsValue posterior_odds;
    double flip_threshold = 1.0;
    // The deciding endpoint had rho exactly one (weak inequality decided it).
    bool boundary_decided = false;
    std::optional<Recommendation> recommendation;
};

inline double loss_ratio(double k, const OddsValue& posterior_odds) {
    if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("loss ratio k must be positive and finite");
    if (std::isinf(posterior_odds.value)) return kInf;
    return k * posterior_odds.value;
}

inline double flip_threshold(const OddsValue& posterior_odds) {
    if (posterior_odds.value == 0.0) return kInf;
    if (std::isinf(posterior_odds.value)) return 0.0;
    return 1.0 / posterior_odds.value;
}

namespace detail {
inline bool near_one(double rho) { return std::abs(rho - 1.0) <= kTieTolerance; }
} // namespace detail

inline Outcome optimal_action_precise(double k, const OddsValue& posterior_odds) {
    const double rho = loss_ratio(k, posterior_odds);
    if (detail::near_one(rho)) return Outcome::Indifferent;
    return rho > 1.0 ? Outcome::ChooseA0 : Outcome::ChooseA1;
}

inline DecisionOutcome optimal_action_robust(const RobustLossInterval& interval, const OddsValue& posterior_odds) {
    DecisionOutcome d;
    d.posterior_odds = posterior_odds;
    d.rho_lower = loss_ratio(interval.k_lower, posterior_odds);
    d.rho_upper = loss_ratio(interval.k_upper, posterior_odds);
    d.flip_threshold = flip_threshold(posterior_odds);

    if (interval.degenerate()) {
        d.outcome = optimal_action_precise(interval.k_lower, posterior_odds);
        d.boundary_decided = d.outcome == Outcome::Indifferent;
        return d;
    }
    const bool lower_tie = detail::near_one(d.rho_lower);
    const bool upper_tie = detail::near_one(d.rho_upper);
    const bool a0 = d.rho_lower >= 1.0 || lower_tie;
    const bool a1 = d.rho_upper <= 1.0 || upper_tie;
    if (a0 && a1) {
        d.outcome = Outcome::Indifferent;
        d.boundary_decided = true;
    } else if (a0) {
        d.outcome = Outcome::ChooseA0;
        d.boundary_decided = lower_tie;
    } else if (a1) {
        d.outcome = Outcome::ChooseA1;
        d.boundary_decided = upper_tie;
    } else {
        d.outcome = Outcome::Withheld;
        Recommendation r;
        r.flip_threshold = d.flip_threshold;
        r.raise_lower_to = d.flip_threshold;
        r.lower_upper_to = d.flip_threshold;
        d.recommendation = r;
    }
    return d;
}

// ---------------------------------------------------------------------------
// Expected posterior losses

inline std::pair<double, double> expected_posterior_loss_simplified(const SimplifiedLoss& loss, double p0_post,
                                                                    double p1_post) {
    if (std::abs(p0_post + p1_post - 1.0) > 1e-9)
        throw DomainError("posterior hypothesis probabilities must sum to one");
    return {loss.k0 * p1_post, loss.k1 * p0_post};
}

// Loss tabulated over theta. Nodes are nondecreasing; a node listed twice
// encodes a jump (left limit, then right limit). Values are interpolated
// linearly between nodes and held constant beyond the first and last node.
struct GeneralLossGrid {
    std::vector<double> nodes;
    std::vector<double> loss_a0;
    std::vector<double> loss_a1;

    void validate() const {
        if (nodes.empty() || nodes.size() != loss_a0.size() || nodes.size() != loss_a1.size())
            throw DomainError("loss grid needs one a0 and one a1 value per node");
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (!std::isfinite(nodes[i])) throw DomainError("loss grid nodes must be finite");
            if (!(loss_a0[i] >= 0.0) || !(loss_a1[i] >= 0.0) || !std::isfinite(loss_a0[i]) || !std::isfinite(loss_a1[i]))
                throw DomainError("loss values must be finite and nonnegative");
            if (i && nodes[i] < nodes[i - 1]) throw DomainError("loss grid nodes must be nondecreasing");
            if (i >= 2 && nodes[i] == nodes[i - 2]) throw DomainError("a loss grid node may appear at most twice");
        }
    }

    // Right-continuous at jumps.
    double eval(const std::vector<double>& values, double x) const {
        if (x < nodes.front()) return values.front();
        if (x >= nodes.back()) return values.back();
        auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - nodes.begin());
        const double x0 = nodes[i - 1], x1 = nodes[i];
        if (x1 == x0) return values[i];
        const double w = (x - x0) / (x1 - x0);
        return values[i - 1] + w * (values[i] - values[i - 1]);
    }
    double a0(double x) const { return eval(loss_a0, x); }
    double a1(double x) const { return eval(loss_a1, x); }
};

// Regret-form step loss: a0 costs k0 on Theta1, a1 costs k1 on Theta0.
inline GeneralLossGrid step_loss_grid(const HypothesisPair& pair, const SimplifiedLoss& loss) {
    std::vector<double> cuts = pair.theta0.finite_endpoints();
    for (double c : pair.theta1.finite_endpoints()) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    auto values_at = [&](double x) -> std::pair<double, double> {
        switch (membership(pair, x)) {
            case Membership::InTheta0: return {0.0, loss.k1};
            case Membership::InTheta1: return {loss.k0, 0.0};
            default: return {0.0, 0.0};
        }
    };
    auto probe = [&](double lo, double hi) {
        if (!std::isfinite(lo)) return std::isfinite(hi) ? hi - 1.0 : 0.0;
        if (!std::isfinite(hi)) return lo + 1.0;
        return 0.5 * (lo + hi);
    };
    GeneralLossGrid g;
    std::vector<double> edges;
    edges.push_back(pair.space.lower);
    for (double c : cuts)
        if (c > pair.space.lower && c < pair.space.upper) edges.push_back(c);
    edges.push_back(pair.space.upper);
    for (std::size_t i = 1; i + 1 < edges.size(); ++i) {
        const auto left = values_at(probe(edges[i - 1], edges[i]));
        const auto right = values_at(probe(edges[i], edges[i + 1]));
        g.nodes.insert(g.nodes.end(), {edges[i], edges[i]});
        g.loss_a0.insert(g.loss_a0.end(), {left.first, right.first});
        g.loss_a1.insert(g.loss_a1.end(), {left.second, right.second});
    }
    if (g.nodes.empty()) {
        const auto v = values_at(probe(edges.front(), edges.back()));
        g.nodes = {probe(edges.front(), edges.back())};
        g.loss_a0 = {v.first};
        g.loss_a1 = {v.second};
    }
    return g;
}

inline std::pair<double, double> expected_posterior_loss_general(const GeneralLossGrid& loss, const Posterior& post) {
    loss.validate();
    Features feat = post.features();
    feat.add_points(loss.nodes);
    const auto breaks = feat.sorted();
    const auto opt = feat.quadrature_options();
    const IntervalUnion domain = post.space().as_union();
    double r0 = integrate([&](double x) { return loss.a0(x) * post.pdf(x); }, domain, breaks, opt).value;
    double r1 = integrate([&](double x) { return loss.a1(x) * post.pdf(x); }, domain, breaks, opt).value;
    if (const auto* g = std::get_if<GridRepresentation>(&post.representation())) {
        for (const auto& [loc, w] : g->atoms) {
            r0 += loss.a0(loc) * w;
            r1 += loss.a1(loc) * w;
        }
    }
    return {r0, r1};
}

// Bayes action: argmin over the two expected losses.
inline Outcome argmin_action(double rho_a0, double rho_a1) {
    if (std::abs(rho_a0 - rho_a1) <= kTieTolerance * std::max(std::abs(rho_a0), std::abs(rho_a1)))
        return Outcome::Indifferent;
    return rho_a0 < rho_a1 ? Outcome::ChooseA0 : Outcome::ChooseA1;
}

// ---------------------------------------------------------------------------
// Additional data for a withheld decision (normal model, conjugate prior)

namespace detail {

inline std::optional<long> search_additional_n(const std::function<bool(long)>& decides, long max_extra) {
    long hi = 1;
    while (hi <= max_extra && !decides(hi)) hi *= 2;
    if (hi > max_extra) {
        if (!decides(max_extra)) return std::nullopt;
        hi = max_extra;
    }
    long lo = hi / 2;  // decides(lo) is false unless lo == 0
    while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        (decides(mid) ? hi : lo) = mid;
    }
    return hi;
}

} // namespace detail

inline void attach_data_recommendation(DecisionOutcome& outcome, const SamplingModel& model, const Prior& prior,
                                       const HypothesisPair& pair, const RobustLossInterval& interval,
                                       long max_extra = 1'000'000'000L) {
    if (outcome.outcome != Outcome::Withheld || !outcome.recommendation) return;
    const auto* nm = std::get_if<NormalKnownVariance>(&model);
    if (!nm) return;
    const bool conjugate = std::holds_alternative<ImproperFlat>(prior.kind) ||
                           (std::holds_alternative<ProperPrior>(prior.kind) &&
                            std::holds_alternative<NormalDensity>(std::get<ProperPrior>(prior.kind).base) &&
                            !std::get<ProperPrior>(prior.kind).truncation);
    if (!conjugate) return;
    auto odds_with = [&](long extra) {
        const NormalKnownVariance more(nm->sigma2, nm->n + extra, nm->mean);
        const auto s = analyze(more, prior, pair);
        return OddsValue::from_probabilities(s.p0_post, s.p1_post);
    };
    outcome.recommendation->additional_n_for_a0 = detail::search_additional_n(
        [&](long e) { return loss_ratio(interval.k_lower, odds_with(e)) >= 1.0; }, max_extra);
    outcome.recommendation->additional_n_for_a1 = detail::search_additional_n(
        [&](long e) { return loss_ratio(interval.k_upper, odds_with(e)) <= 1.0; }, max_extra);
}

// ---------------------------------------------------------------------------
// Sensitivity sweeps

struct SweepPoint {
    double value = 0.0;  // the swept k or odds value
    Outcome outcome = Outcome::Indifferent;
    double rho_lower = 0.0;
    double rho_upper = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    // k-sweep: the single k* = 1 / odds. odds-sweep: {1 / kUpper, 1 / kLower}.
    std::vector<double> thresholds;
};

inline std::vector<double> make_grid(double lo, double hi, std::size_t n, bool log_spaced) {
    if (n == 0) throw DomainError("grid needs at least one point");
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("grid bounds must satisfy lo <= hi");
    if (log_spaced && !(lo > 0.0)) throw DomainError("log-spaced grid needs positive bounds");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        g[i] = log_spaced ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo);
    }
    if (n > 1) g.back() = hi;
    return g;
}

namespace detail {
inline void check_sweep_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw DomainError("sweep grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw DomainError("sweep values must be positive and finite");
        if (i && grid[i] < grid[i - 1]) throw DomainError("sweep grid must be sorted ascending");
    }
}
} // namespace detail

inline SweepResult sweep_k(const std::vector<double>& k_grid, const OddsValue& posterior_odds) {
    detail::check_sweep_grid(k_grid);
    SweepResult r;
    r.thresholds = {flip_threshold(posterior_odds)};
    for (double k : k_grid) {
        const double rho = loss_ratio(k, posterior_odds);
        r.points.push_back({k, optimal_action_precise(k, posterior_odds), rho, rho});
    }
    return r;
}

inline SweepResult sweep_odds(const std::vector<double>& odds_grid, const RobustLossInterval& interval) {
    detail::check_sweep_grid(odds_grid);
    SweepResult r;
    r.thresholds = {1.0 / interval.k_upper, 1.0 / interval.k_lower};
    for (double o : odds_grid) {
        const auto d = optimal_action_robust(interval, OddsValue::of(o));
        r.points.push_back({o, d.outcome, d.rho_lower, d.rho_upper});
    }
    return r;
}

inline std::vector<DecisionOutcome> sweep_intervals(const std::vector<RobustLossInterval>& intervals,
                                                    const OddsValue& posterior_odds) {
    std::vector<DecisionOutcome> out;
    out.reserve(intervals.size());
    for (const auto& iv : intervals) out.push_back(optimal_action_robust(iv, posterior_odds));
    return out;
}

} // namespace bfd
