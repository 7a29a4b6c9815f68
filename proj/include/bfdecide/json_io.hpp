#pragma once

// JSON encodings shared by documents, CLI spec files and the service.
// Infinite bounds are written as the strings "+inf" and "-inf".

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bfdecide/bayes_factor.hpp"
#include "bfdecide/decision.hpp"
#include "bfdecide/errors.hpp"
#include "bfdecide/hypotheses.hpp"
#include "bfdecide/inference.hpp"
#include "bfdecide/interval.hpp"
#include "bfdecide/models.hpp"
#include "bfdecide/priors.hpp"

namespace bfd::io {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Field access

inline const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ValidationError(where + ": missing field '" + key + "'");
    return *it;
}

inline bool has(const json& j, const char* key) { return j.is_object() && j.contains(key) && !j.at(key).is_null(); }

inline double number(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "+inf" || s == "inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    throw ValidationError(where + ": expected a number");
}

inline double number(const json& j, const char* key, const std::string& where) {
    return number(field(j, key, where), where + "." + key);
}

inline std::optional<double> opt_number(const json& j, const char* key, const std::string& where) {
    if (!has(j, key)) return std::nullopt;
    return number(j.at(key), where + "." + key);
}

inline long integer(const json& j, const char* key, const std::string& where) {
    const json& v = field(j, key, where);
    if (!v.is_number_integer()) throw ValidationError(where + "." + key + ": expected an integer");
    return v.get<long>();
}

inline std::string text(const json& j, const char* key, const std::string& where) {
    const json& v = field(j, key, where);
    if (!v.is_string()) throw ValidationError(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

inline bool boolean(const json& j, const char* key, const std::string& where) {
    const json& v = field(j, key, where);
    if (!v.is_boolean()) throw ValidationError(where + "." + key + ": expected true or false");
    return v.get<bool>();
}

inline std::vector<double> numbers(const json& j, const char* key, const std::string& where) {
    const json& v = field(j, key, where);
    if (!v.is_array()) throw ValidationError(where + "." + key + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "." + key + "[" + std::to_string(i) + "]"));
    return out;
}

inline json num(double v) {
    if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
    if (std::isnan(v)) return nullptr;
    return v;
}

inline json nums(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

// ---------------------------------------------------------------------------
// Sets

inline json to_json(const Interval& iv) { return json::array({num(iv.lo), num(iv.hi), iv.lo_closed, iv.hi_closed}); }

inline Interval interval_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || (j.size() != 2 && j.size() != 4))
        throw ValidationError(where + ": interval must be [lo, hi] or [lo, hi, loClosed, hiClosed]");
    const double lo = number(j[0], where + "[0]");
    const double hi = number(j[1], where + "[1]");
    if (std::isnan(lo) || std::isnan(hi)) throw ValidationError(where + ": bounds must be numbers");
    if (j.size() == 2) return Interval::make(lo, hi, true, true);
    if (!j[2].is_boolean() || !j[3].is_boolean()) throw ValidationError(where + ": closedness flags must be booleans");
    return Interval::make(lo, hi, j[2].get<bool>(), j[3].get<bool>());
}

inline json to_json(const IntervalUnion& u) {
    json a = json::array();
    for (const auto& iv : u.intervals()) a.push_back(to_json(iv));
    return a;
}

inline IntervalUnion union_from_json(const json& j, const std::string& where) {
    if (!j.is_array()) throw ValidationError(where + ": expected an array of intervals");
    std::vector<Interval> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(interval_from_json(j[i], where + "[" + std::to_string(i) + "]"));
    return IntervalUnion(std::move(out));
}

inline json to_json(const ParameterSpace& s) { return {{"lower", num(s.lower)}, {"upper", num(s.upper)}}; }

inline ParameterSpace space_from_json(const json& j, const std::string& where) {
    return ParameterSpace(number(j, "lower", where), number(j, "upper", where));
}

inline json to_json(const HypothesisPair& p) {
    return {{"space", to_json(p.space)},
            {"theta0", to_json(p.theta0)},
            {"theta1", to_json(p.theta1)},
            {"labels", json::array({p.labels.first, p.labels.second})}};
}

// Accepts the full form or the shorthands {"interval": [a, b]} and {"point": a}.
inline HypothesisPair pair_from_json(const json& j, const std::string& where, std::optional<ParameterSpace> default_space = {}) {
    if (!j.is_object()) throw ValidationError(where + ": expected an object");
    ParameterSpace space = has(j, "space") ? space_from_json(j.at("space"), where + ".space")
                                           : default_space.value_or(ParameterSpace::real_line());
    HypothesisPair p;
    if (has(j, "interval")) {
        const Interval iv = interval_from_json(j.at("interval"), where + ".interval");
        p = HypothesisPair::interval_vs_complement(iv.lo, iv.hi, space);
    } else if (has(j, "point")) {
        p = HypothesisPair::point_vs_complement(number(j, "point", where), space);
    } else {
        p.space = space;
        p.theta0 = union_from_json(field(j, "theta0", where), where + ".theta0");
        p.theta1 = union_from_json(field(j, "theta1", where), where + ".theta1");
    }
    if (has(j, "labels")) {
        const json& l = j.at("labels");
        if (!l.is_array() || l.size() != 2 || !l[0].is_string() || !l[1].is_string())
            throw ValidationError(where + ".labels: expected two strings");
        p.labels = {l[0].get<std::string>(), l[1].get<std::string>()};
    }
    return p;
}

inline json to_json(const PartitionReport& r) {
    json gaps = json::array(), overlaps = json::array(), outside = json::array();
    for (const auto& iv : r.gaps) gaps.push_back(to_json(iv));
    for (const auto& iv : r.overlaps) overlaps.push_back(to_json(iv));
    for (const auto& iv : r.outside_space) outside.push_back(to_json(iv));
    return {{"valid", r.valid},   {"gaps", gaps},           {"overlaps", overlaps}, {"outsideSpace", outside},
            {"boundaryPoints", nums(r.boundary_points)}, {"pointNull", r.point_null}, {"messages", r.messages}};
}

// ---------------------------------------------------------------------------
// Densities, models, priors

inline json to_json(const Density& d) {
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, NormalDensity>) return {{"family", "normal"}, {"mu", x.mu}, {"sigma2", x.sigma2}};
            else if constexpr (std::is_same_v<T, UniformDensity>) return {{"family", "uniform"}, {"a", x.lower}, {"b", x.upper}};
            else if constexpr (std::is_same_v<T, BetaDensity>) return {{"family", "beta"}, {"alpha", x.alpha}, {"beta", x.beta}};
            else if constexpr (std::is_same_v<T, GridDensity>) return {{"family", "grid"}, {"nodes", nums(x.nodes)}, {"values", nums(x.values)}};
            else {
                json j{{"family", "log_table"}, {"nodes", nums(x.nodes)}, {"logValues", nums(x.log_values)}};
                if (x.left_tail_exponent) j["leftTailExponent"] = *x.left_tail_exponent;
                if (x.right_tail_exponent) j["rightTailExponent"] = *x.right_tail_exponent;
                return j;
            }
        },
        d);
}

inline Density density_from_json(const json& j, const std::string& where) {
    const std::string f = text(j, "family", where);
    if (f == "normal") return NormalDensity(number(j, "mu", where), number(j, "sigma2", where));
    if (f == "uniform") return UniformDensity(number(j, "a", where), number(j, "b", where));
    if (f == "beta") return BetaDensity(number(j, "alpha", where), number(j, "beta", where));
    if (f == "grid") return GridDensity(numbers(j, "nodes", where), numbers(j, "values", where));
    if (f == "log_table")
        return LogDensityTable(numbers(j, "nodes", where), numbers(j, "logValues", where),
                               opt_number(j, "leftTailExponent", where), opt_number(j, "rightTailExponent", where));
    throw ValidationError(where + ".family: unknown density family '" + f + "'");
}

inline json to_json(const SamplingModel& m) {
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, NormalKnownVariance>)
                return {{"family", "normal_known_variance"}, {"sigma2", x.sigma2}, {"n", x.n}, {"mean", x.mean}};
            else if constexpr (std::is_same_v<T, Binomial>)
                return {{"family", "binomial"}, {"n", x.n}, {"successes", x.successes}};
            else {
                json j{{"family", "generic_loglik"}, {"grid", nums(x.grid)}, {"loglik", nums(x.loglik)}};
                if (x.space) j["space"] = to_json(*x.space);
                return j;
            }
        },
        m);
}

inline SamplingModel model_from_json(const json& j, const std::string& where) {
    const std::string f = text(j, "family", where);
    if (f == "normal_known_variance")
        return NormalKnownVariance(number(j, "sigma2", where), integer(j, "n", where), number(j, "mean", where));
    if (f == "binomial") return Binomial(integer(j, "n", where), integer(j, "successes", where));
    if (f == "generic_loglik") {
        std::optional<ParameterSpace> sp;
        if (has(j, "space")) sp = space_from_json(j.at("space"), where + ".space");
        return GenericLogLik(numbers(j, "grid", where), numbers(j, "loglik", where), sp);
    }
    throw ValidationError(where + ".family: unknown sampling model '" + f + "'");
}

// Model description without data (the pre-data specification).
inline json model_family_json(const SamplingModel& m) {
    json j = to_json(m);
    if (std::holds_alternative<NormalKnownVariance>(m)) return {{"family", j["family"]}, {"sigma2", j["sigma2"]}};
    if (std::holds_alternative<Binomial>(m)) return {{"family", j["family"]}};
    return {{"family", j["family"]}};
}

inline json to_json(const WithinHypothesisPrior& w) {
    if (w.is_point()) return {{"family", "point"}, {"at", w.point()}};
    json j = to_json(w.density().base());
    j["support"] = to_json(w.support());
    return j;
}

inline WithinHypothesisPrior within_from_json(const json& j, const std::string& where) {
    if (text(j, "family", where) == "point") return WithinHypothesisPrior::point_mass(number(j, "at", where));
    return WithinHypothesisPrior::from_density(density_from_json(j, where),
                                               union_from_json(field(j, "support", where), where + ".support"));
}

inline json to_json(const Prior& p) {
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, ProperPrior>) {
                json j{{"kind", "proper"}};
                j.update(to_json(x.base));
                if (x.truncation) j["truncation"] = to_json(*x.truncation);
                return j;
            } else if constexpr (std::is_same_v<T, ImproperFlat>) {
                return {{"kind", "improper_flat"}, {"c", x.c}};
            } else if constexpr (std::is_same_v<T, ImproperLogDensity>) {
                json j = to_json(Density{x.table});
                j.erase("family");
                json out{{"kind", "improper_log_density"}};
                out.update(j);
                return out;
            } else {
                json j{{"kind", "decomposed"}, {"p0", x.p0}};
                j["within0"] = x.within0 ? to_json(*x.within0) : json(nullptr);
                j["within1"] = x.within1 ? to_json(*x.within1) : json(nullptr);
                return j;
            }
        },
        p.kind);
}

inline Prior prior_from_json(const json& j, const std::string& where) {
    const std::string k = text(j, "kind", where);
    if (k == "proper") {
        std::optional<IntervalUnion> trunc;
        if (has(j, "truncation")) trunc = union_from_json(j.at("truncation"), where + ".truncation");
        return Prior::proper(density_from_json(j, where), trunc);
    }
    if (k == "improper_flat") return Prior::flat(number(j, "c", where));
    if (k == "improper_log_density")
        return Prior::log_density(LogDensityTable(numbers(j, "nodes", where), numbers(j, "logValues", where),
                                                  opt_number(j, "leftTailExponent", where),
                                                  opt_number(j, "rightTailExponent", where)));
    if (k == "decomposed") {
        std::optional<WithinHypothesisPrior> w0, w1;
        if (has(j, "within0")) w0 = within_from_json(j.at("within0"), where + ".within0");
        if (has(j, "within1")) w1 = within_from_json(j.at("within1"), where + ".within1");
        return recompose(number(j, "p0", where), w0, w1);
    }
    throw ValidationError(where + ".kind: unknown prior kind '" + k + "'");
}

// ---------------------------------------------------------------------------
// Results

inline json to_json(const OddsValue& o) { return num(o.value); }

inline json to_json(const BayesFactorValue& bf) {
    json j{{"bf", num(bf.value)}, {"logBf", num(bf.log_value)}, {"orientation", "H0_over_H1"}};
    if (const auto* imp = std::get_if<ImportedExternal>(&bf.provenance)) j["provenance"] = {{"imported", imp->source}};
    else j["provenance"] = "computed";
    return j;
}

inline BayesFactorValue imported_bf_from_json(const json& j, const std::string& where) {
    BfOrientation o = BfOrientation::H0OverH1;
    if (has(j, "orientation")) {
        const auto s = text(j, "orientation", where);
        if (s == "H1_over_H0") o = BfOrientation::H1OverH0;
        else if (s != "H0_over_H1") throw ValidationError(where + ".orientation: expected H0_over_H1 or H1_over_H0");
    }
    const std::string src = has(j, "source") ? text(j, "source", where) : std::string("unspecified");
    return BayesFactorValue::imported(number(j, "bf", where), src, o);
}

inline json to_json(const Posterior& post) {
    json j;
    if (const auto* cf = std::get_if<ClosedForm>(&post.representation())) {
        j["representation"] = "closed_form";
        j["density"] = std::visit([](const auto& d) { return to_json(Density{d}); }, cf->density);
    } else {
        const auto& g = std::get<GridRepresentation>(post.representation());
        j["representation"] = "grid";
        json atoms = json::array();
        for (const auto& [loc, w] : g.atoms) atoms.push_back({{"at", loc}, {"probability", w}});
        j["grid"] = {{"nodes", nums(g.nodes)}, {"density", nums(g.density)}, {"atoms", atoms}};
    }
    j["mean"] = post.mean();
    j["sd"] = post.sd();
    j["improperPrior"] = post.improper_prior();
    j["evidenceLog"] = post.evidence_log() ? json(*post.evidence_log()) : json(nullptr);
    return j;
}

inline json to_json(const PosteriorSummary& s) {
    json j = to_json(s.posterior);
    j["p0Post"] = s.p0_post;
    j["p1Post"] = s.p1_post;
    j["posteriorOdds"] = to_json(OddsValue::from_probabilities(s.p0_post, s.p1_post));
    return j;
}

inline json to_json(const Recommendation& r) {
    json j{{"flipThreshold", num(r.flip_threshold)},
           {"raiseLowerTo", num(r.raise_lower_to)},
           {"lowerUpperTo", num(r.lower_upper_to)},
           {"additionalNForA0", r.additional_n_for_a0 ? json(*r.additional_n_for_a0) : json(nullptr)},
           {"additionalNForA1", r.additional_n_for_a1 ? json(*r.additional_n_for_a1) : json(nullptr)},
           {"advice", r.advice}};
    return j;
}

inline Recommendation recommendation_from_json(const json& j, const std::string& where) {
    Recommendation r;
    r.flip_threshold = number(j, "flipThreshold", where);
    r.raise_lower_to = number(j, "raiseLowerTo", where);
    r.lower_upper_to = number(j, "lowerUpperTo", where);
    if (has(j, "additionalNForA0")) r.additional_n_for_a0 = integer(j, "additionalNForA0", where);
    if (has(j, "additionalNForA1")) r.additional_n_for_a1 = integer(j, "additionalNForA1", where);
    r.advice = text(j, "advice", where);
    return r;
}

inline json to_json(const DecisionOutcome& d) {
    json j{{"outcome", to_string(d.outcome)},
           {"rhoLower", num(d.rho_lower)},
           {"rhoUpper", num(d.rho_upper)},
           {"flipThreshold", num(d.flip_threshold)},
           {"posteriorOdds", to_json(d.posterior_odds)},
           {"boundaryDecided", d.boundary_decided}};
    j["recommendation"] = d.recommendation ? to_json(*d.recommendation) : json(nullptr);
    return j;
}

inline DecisionOutcome outcome_from_json(const json& j, const std::string& where) {
    DecisionOutcome d;
    d.outcome = outcome_from_string(text(j, "outcome", where));
    d.rho_lower = number(j, "rhoLower", where);
    d.rho_upper = number(j, "rhoUpper", where);
    d.flip_threshold = number(j, "flipThreshold", where);
    d.posterior_odds = OddsValue::of(number(j, "posteriorOdds", where));
    d.boundary_decided = boolean(j, "boundaryDecided", where);
    if (has(j, "recommendation")) d.recommendation = recommendation_from_json(j.at("recommendation"), where + ".recommendation");
    return d;
}

inline json to_json(const SweepResult& r) {
    json pts = json::array();
    for (const auto& p : r.points)
        pts.push_back({{"value", num(p.value)}, {"outcome", to_string(p.outcome)}, {"rhoLower", num(p.rho_lower)},
                       {"rhoUpper", num(p.rho_upper)}});
    return {{"points", pts}, {"thresholds", nums(r.thresholds)}};
}

inline RobustLossInterval interval_k_from_json(const json& j, const std::string& where) {
    const double lo = number(j, "kLower", where);
    const double hi = number(j, "kUpper", where);
    if (!(lo > 0.0) || !std::isfinite(hi) || !std::isfinite(lo))
        throw ValidationError(where + ": kLower and kUpper must be positive and finite");
    if (lo > hi) throw ValidationError(where + ": kLower must not exceed kUpper");
    return RobustLossInterval(lo, hi);
}

// Parses text, turning syntax errors into validation errors.
inline json parse(const std::string& text, const std::string& where = "request") {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(where + ": malformed JSON (" + e.what() + ")");
    }
}

} // namespace bfd::io
