#pragma once

// Step-by-step analysis documents.
//
// The full guide (steps "1".."11") goes from actions to a published decision;
// the Bayes-factor guide (steps "A".."G") reuses a reported Bayes factor.
// Steps before the data (1-7, or A-E) are frozen once the document is locked;
// entering data (step 8) or the imported Bayes factor (step F) locks it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bfdecide/bayes_factor.hpp"
#include "bfdecide/decision.hpp"
#include "bfdecide/errors.hpp"
#include "bfdecide/hash.hpp"
#include "bfdecide/inference.hpp"
#include "bfdecide/json_io.hpp"

namespace bfd::workflow {

using io::json;

inline constexpr int kSchemaVersion = 1;
inline const std::string kRestartAdvice =
    "do not use this Bayes factor value; restart the decision theoretic account with the full guide";

enum class Guide { Full, FromBayesFactor };
enum class Status { Draft, Locked, DataEntered, Decided, WithheldPending };
enum class StepState { Pending, Complete, Invalidated };

inline const char* to_string(Guide g) { return g == Guide::Full ? "full" : "from_bayes_factor"; }
inline const char* to_string(Status s) {
    switch (s) {
        case Status::Draft: return "draft";
        case Status::Locked: return "locked";
        case Status::DataEntered: return "data_entered";
        case Status::Decided: return "decided";
        case Status::WithheldPending: return "withheld_pending";
    }
    return "?";
}
inline const char* to_string(StepState s) {
    return s == StepState::Pending ? "pending" : s == StepState::Complete ? "complete" : "invalidated";
}

inline Guide guide_from_string(const std::string& s) {
    if (s == "full" || s == "full_decision") return Guide::Full;
    if (s == "from_bayes_factor") return Guide::FromBayesFactor;
    throw ValidationError("unknown guide '" + s + "' (expected 'full' or 'from_bayes_factor')");
}
inline Status status_from_string(const std::string& s) {
    for (Status x : {Status::Draft, Status::Locked, Status::DataEntered, Status::Decided, Status::WithheldPending})
        if (s == to_string(x)) return x;
    throw ValidationError("unknown document status '" + s + "'");
}
inline StepState state_from_string(const std::string& s) {
    for (StepState x : {StepState::Pending, StepState::Complete, StepState::Invalidated})
        if (s == to_string(x)) return x;
    throw ValidationError("unknown step state '" + s + "'");
}

struct StepRecord {
    std::string id;
    std::string title;
    StepState state = StepState::Pending;
    json payload;  // null until submitted
    std::string rationale;
    json derived;  // values computed when the step was accepted

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct AnalysisDocument {
    int schema_version = kSchemaVersion;
    std::string id;
    long version = 1;
    Guide guide = Guide::Full;
    Status status = Status::Draft;
    std::vector<StepRecord> steps;
    std::optional<std::string> pre_data_hash;
    json history = json::array();

    const StepRecord& step(const std::string& sid) const {
        for (const auto& s : steps)
            if (s.id == sid) return s;
        throw NotFoundError("document " + id + " has no step '" + sid + "'");
    }
    StepRecord& step(const std::string& sid) {
        return const_cast<StepRecord&>(static_cast<const AnalysisDocument&>(*this).step(sid));
    }
    bool complete(const std::string& sid) const { return step(sid).state == StepState::Complete; }

    friend bool operator==(const AnalysisDocument&, const AnalysisDocument&) = default;
};

// ---------------------------------------------------------------------------
// Guide definitions

struct StepDef {
    std::string id;
    std::string title;
    std::vector<std::string> requires_steps;
    bool pre_data = false;
};

inline const std::vector<StepDef>& step_defs(Guide g) {
    static const std::vector<StepDef> full{
        {"1", "Actions", {}, true},
        {"2", "Sampling distribution", {}, true},
        {"3", "Prior distribution", {"2"}, true},
        {"4", "Assumption", {}, true},
        {"5", "Hypotheses", {"2", "4"}, true},
        {"6", "Errors", {"1", "5"}, true},
        {"7", "Loss magnitude", {"6"}, true},
        {"8", "Investigation", {"1", "2", "3", "4", "5", "6", "7"}, false},
        {"9", "Posterior distribution", {"8"}, false},
        {"10", "Optimal action", {"7", "9"}, false},
        {"11", "Publish data", {"10"}, false},
    };
    static const std::vector<StepDef> from_bf{
        {"A", "Applicability of the sampling distribution", {}, true},
        {"B", "Applicability of the hypotheses", {"A"}, true},
        {"C", "Applicability of the prior distribution", {"B"}, true},
        {"D", "Prior odds", {"C"}, true},
        {"E", "Loss function", {"B"}, true},
        {"F", "Posterior odds", {"A", "B", "C", "D", "E"}, false},
        {"G", "Optimal action", {"A", "B", "C", "D", "E", "F"}, false},
    };
    return g == Guide::Full ? full : from_bf;
}

inline const StepDef& step_def(Guide g, const std::string& sid) {
    for (const auto& d : step_defs(g))
        if (d.id == sid) return d;
    throw NotFoundError("guide '" + std::string(to_string(g)) + "' has no step '" + sid + "'");
}

inline const char* data_step(Guide g) { return g == Guide::Full ? "8" : "F"; }
inline const char* decision_step(Guide g) { return g == Guide::Full ? "10" : "G"; }

// Steps whose requirements include `sid`, directly or transitively.
inline std::vector<std::string> dependents(Guide g, const std::string& sid) {
    std::set<std::string> found{sid};
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& d : step_defs(g)) {
            if (found.count(d.id)) continue;
            for (const auto& r : d.requires_steps)
                if (found.count(r)) {
                    found.insert(d.id);
                    grew = true;
                    break;
                }
        }
    }
    std::vector<std::string> out;
    for (const auto& d : step_defs(g))
        if (d.id != sid && found.count(d.id)) out.push_back(d.id);
    return out;
}

inline AnalysisDocument create_analysis(Guide guide, std::string id) {
    if (id.empty()) throw ValidationError("document id must be nonempty");
    AnalysisDocument doc;
    doc.id = std::move(id);
    doc.guide = guide;
    for (const auto& d : step_defs(guide)) doc.steps.push_back({d.id, d.title, StepState::Pending, nullptr, "", nullptr});
    doc.history.push_back({{"revision", 1}, {"event", "create"}, {"guide", to_string(guide)}});
    return doc;
}

inline AnalysisDocument create_analysis(const std::string& guide, std::string id) {
    return create_analysis(guide_from_string(guide), std::move(id));
}

// ---------------------------------------------------------------------------
// Accessors for completed payloads

namespace detail {

inline std::string where(const std::string& sid) { return "step " + sid; }

inline const json& payload(const AnalysisDocument& doc, const std::string& sid) {
    const auto& s = doc.step(sid);
    if (s.state != StepState::Complete) throw DependencyError("step " + sid + " is not complete");
    return s.payload;
}

inline ParameterSpace model_space(const AnalysisDocument& doc) {
    (void)payload(doc, "2");
    return io::space_from_json(doc.step("2").derived.at("space"), where("2") + ".space");
}

inline Prior main_prior(const AnalysisDocument& doc) {
    return io::prior_from_json(io::field(payload(doc, "3"), "prior", where("3")), where("3") + ".prior");
}

inline HypothesisPair hypotheses(const AnalysisDocument& doc) {
    return io::pair_from_json(payload(doc, "5"), where("5"), model_space(doc));
}

inline SamplingModel model_with_data(const AnalysisDocument& doc) {
    json merged = payload(doc, "2");
    for (const auto& [k, v] : payload(doc, "8").items()) merged[k] = v;
    return io::model_from_json(merged, where("8"));
}

inline RobustLossInterval loss_interval(const AnalysisDocument& doc) {
    if (doc.guide == Guide::Full) return io::interval_k_from_json(payload(doc, "7"), where("7"));
    return io::interval_k_from_json(payload(doc, "E"), where("E"));
}

inline std::string nonempty_text(const json& p, const char* key, const std::string& w) {
    std::string t = io::text(p, key, w);
    if (t.find_first_not_of(" \t\r\n") == std::string::npos)
        throw ValidationError(w + "." + key + " must be a nonempty description");
    return t;
}

inline ActionPair actions_from(const json& p, const std::string& w) {
    return ActionPair(io::text(p, "a0", w), io::text(p, "a1", w));
}

// Sorted keys, and integral floats written as integers so that 2 and 2.0 hash alike.
inline nlohmann::json canonical(const json& j) {
    if (j.is_object()) {
        nlohmann::json o = nlohmann::json::object();
        for (const auto& [k, v] : j.items()) o[k] = canonical(v);
        return o;
    }
    if (j.is_array()) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& v : j) a.push_back(canonical(v));
        return a;
    }
    if (j.is_number_float()) {
        const double x = j.get<double>();
        if (std::isfinite(x) && x == std::floor(x) && std::fabs(x) < 9.007199254740992e15)
            return static_cast<std::int64_t>(x);
    }
    if (j.is_number_unsigned()) return static_cast<std::int64_t>(j.get<std::uint64_t>());
    return nlohmann::json::parse(j.dump());
}

inline std::string pre_data_hash(const AnalysisDocument& doc) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& d : step_defs(doc.guide)) {
        if (!d.pre_data) continue;
        const auto& s = doc.step(d.id);
        arr.push_back({{"id", s.id}, {"payload", canonical(s.payload)}, {"rationale", s.rationale}});
    }
    return sha256_hex(arr.dump());
}

} // namespace detail

// ---------------------------------------------------------------------------
// Applicability (Bayes-factor guide, steps A-C)

struct ApplicabilityItem {
    std::string step;
    bool pass = false;
    std::string message;
};

struct ApplicabilityReport {
    bool pass = false;
    std::vector<ApplicabilityItem> items;
    std::string recommendation;
    json set_differences;
};

inline ApplicabilityReport applicability_checks(const AnalysisDocument& doc) {
    if (doc.guide != Guide::FromBayesFactor) throw ValidationError("applicability checks apply to the Bayes-factor guide");
    ApplicabilityReport r;
    auto missing = [&](const char* sid) {
        r.items.push_back({sid, false, std::string("step ") + sid + " has not been completed"});
    };
    if (doc.complete("A")) {
        const bool ok = io::boolean(doc.step("A").payload, "parameterRelevant", "step A");
        r.items.push_back({"A", ok,
                           ok ? "the parameter is relevant for the decision of interest"
                              : "step A: the parameter is not relevant for the decision of interest"});
    } else {
        missing("A");
    }
    if (doc.complete("B")) {
        const json& p = doc.step("B").payload;
        const auto dp = io::pair_from_json(io::field(p, "decisionPair", "step B"), "step B.decisionPair");
        const auto bp = io::pair_from_json(io::field(p, "bfPair", "step B"), "step B.bfPair");
        const bool ok = set_equal(dp, bp);
        r.set_differences = {{"theta0DecisionOnly", io::to_json(difference(dp.theta0, bp.theta0))},
                             {"theta0BayesFactorOnly", io::to_json(difference(bp.theta0, dp.theta0))},
                             {"theta1DecisionOnly", io::to_json(difference(dp.theta1, bp.theta1))},
                             {"theta1BayesFactorOnly", io::to_json(difference(bp.theta1, dp.theta1))}};
        std::string msg = ok ? "the hypotheses of the Bayes factor equal those of the decision problem"
                             : "step B: the hypotheses of the Bayes factor (theta0 = " + to_string(bp.theta0) +
                                   ") differ from those of the decision problem (theta0 = " + to_string(dp.theta0) + ")";
        if (!(dp.space == bp.space)) msg += "; the parameter spaces differ";
        r.items.push_back({"B", ok, msg});
    } else {
        missing("B");
    }
    if (doc.complete("C")) {
        const bool ok = io::boolean(doc.step("C").payload, "withinPriorsMatch", "step C");
        r.items.push_back({"C", ok,
                           ok ? "the within-hypothesis priors match the available information"
                              : "step C: the within-hypothesis priors do not match the available information"});
    } else {
        missing("C");
    }
    r.pass = std::all_of(r.items.begin(), r.items.end(), [](const auto& i) { return i.pass; });
    if (!r.pass) r.recommendation = kRestartAdvice;
    return r;
}

inline json to_json(const ApplicabilityReport& r) {
    json items = json::array();
    for (const auto& i : r.items) items.push_back({{"step", i.step}, {"pass", i.pass}, {"message", i.message}});
    json j{{"result", r.pass ? "PASS" : "FAIL"}, {"items", items}};
    j["recommendation"] = r.recommendation.empty() ? json(nullptr) : json(r.recommendation);
    j["setDifferences"] = r.set_differences.is_null() ? json(nullptr) : r.set_differences;
    return j;
}

// ---------------------------------------------------------------------------
// Step validation and derived values

namespace detail {

inline json posterior_brief(const PosteriorSummary& s) {
    json j = io::to_json(s);
    j.erase("grid");
    return j;
}

inline json validate_full(const AnalysisDocument& doc, const std::string& sid, const json& p, const std::string& rationale) {
    const std::string w = where(sid);
    if (sid == "1") {
        (void)actions_from(p, w);
        return nullptr;
    }
    if (sid == "2") {
        json probe = p;
        const std::string fam = io::text(p, "family", w);
        if (fam == "normal_known_variance") {
            probe["n"] = 1;
            probe["mean"] = 0.0;
        } else if (fam == "binomial") {
            probe["n"] = 1;
            probe["successes"] = 0;
        } else if (fam == "generic_loglik") {
            if (!io::has(p, "space")) throw ValidationError(w + ": generic_loglik needs an explicit 'space'");
            const auto sp = io::space_from_json(p.at("space"), w + ".space");
            const double lo = std::isfinite(sp.lower) ? sp.lower : -1.0, hi = std::isfinite(sp.upper) ? sp.upper : 1.0;
            probe["grid"] = json::array({lo, hi});
            probe["loglik"] = json::array({0.0, 0.0});
        }
        const SamplingModel m = io::model_from_json(probe, w);
        return {{"space", io::to_json(parameter_space(m))}};
    }
    if (sid == "3") {
        const ParameterSpace sp = model_space(doc);
        auto check = [&](const json& pj, const std::string& ww) {
            const Prior pr = io::prior_from_json(pj, ww);
            if (pr.is_decomposed()) return json{{"kind", "decomposed"}, {"properness", "proper"}};
            const ProperCheck c = check_proper(pr, sp);
            return json{{"kind", kind_name(pr)}, {"properness", c.proper() ? "proper" : "improper"}, {"mass", io::num(c.mass)}};
        };
        json d = check(io::field(p, "prior", w), w + ".prior");
        json alts = json::array();
        if (io::has(p, "alternatives")) {
            const json& a = p.at("alternatives");
            if (!a.is_array()) throw ValidationError(w + ".alternatives: expected an array of priors");
            for (std::size_t i = 0; i < a.size(); ++i) alts.push_back(check(a[i], w + ".alternatives[" + std::to_string(i) + "]"));
        }
        d["alternatives"] = alts;
        return d;
    }
    if (sid == "4") {
        if (!io::boolean(p, "acknowledged", w))
            throw ValidationError(w + ": the hypothesis-based loss simplification must be explicitly acknowledged");
        return nullptr;
    }
    if (sid == "5") {
        const HypothesisPair pair = io::pair_from_json(p, w, model_space(doc));
        if (!(pair.space == model_space(doc)))
            throw ValidationError(w + ": the hypotheses must use the model's parameter space " + to_string(model_space(doc).as_interval()));
        const PartitionReport rep = validate_partition(pair);
        if (!rep.valid) {
            std::string msg = w + ": theta0 and theta1 must partition the parameter space";
            for (const auto& m : rep.messages) msg += "; " + m;
            throw ValidationError(msg);
        }
        return {{"partition", io::to_json(rep)}, {"hypotheses", io::to_json(pair)}};
    }
    if (sid == "6") {
        (void)nonempty_text(p, "typeI", w);
        (void)nonempty_text(p, "typeII", w);
        return nullptr;
    }
    if (sid == "7") {
        const auto iv = io::interval_k_from_json(p, w);
        return {{"kLower", iv.k_lower}, {"kUpper", iv.k_upper}};
    }
    if (sid == "8") {
        json merged = payload(doc, "2");
        for (const auto& [k, v] : p.items()) merged[k] = v;
        const SamplingModel m = io::model_from_json(merged, w);
        if (!(parameter_space(m) == model_space(doc))) throw ValidationError(w + ": data change the parameter space");
        return {{"model", io::to_json(m)}};
    }
    if (sid == "9") {
        PosteriorOptions opt;
        if (io::has(p, "forceGrid")) opt.force_grid = io::boolean(p, "forceGrid", w);
        const SamplingModel m = model_with_data(doc);
        const Prior pr = main_prior(doc);
        const HypothesisPair pair = hypotheses(doc);
        const PosteriorSummary s = analyze(m, pr, pair, opt);
        json d{{"posterior", posterior_brief(s)}};
        const HypothesisMasses pm = prior_hypothesis_probabilities(pr, pair);
        d["priorP0"] = pm.defined() ? json(*pm.p0) : json(nullptr);
        d["priorP1"] = pm.defined() ? json(*pm.p1) : json(nullptr);
        try {
            d["bayesFactor"] = io::to_json(bayes_factor(m, pr, pair));
        } catch (const Error& e) {
            d["bayesFactor"] = {{"error", e.code()}, {"message", e.what()}};
        }
        return d;
    }
    if (sid == "10") {
        // Handled by run_decision; a payload may narrow the loss interval after a withheld decision.
        if (io::has(p, "narrowedInterval")) {
            const auto orig = loss_interval(doc);
            const auto nar = io::interval_k_from_json(p.at("narrowedInterval"), w + ".narrowedInterval");
            if (nar.k_lower < orig.k_lower || nar.k_upper > orig.k_upper)
                throw ValidationError(w + ": the narrowed interval must lie inside the step 7 interval");
            if (rationale.empty()) throw ValidationError(w + ": narrowing the loss interval requires a rationale");
        }
        return nullptr;
    }
    if (sid == "11") {
        if (io::has(p, "dataLocation")) (void)io::text(p, "dataLocation", w);
        return nullptr;
    }
    throw NotFoundError("unknown step " + sid);
}

inline json validate_bf_guide(const AnalysisDocument& doc, const std::string& sid, const json& p, const std::string& rationale) {
    const std::string w = where(sid);
    if (sid == "A") {
        (void)io::boolean(p, "parameterRelevant", w);
        return nullptr;
    }
    if (sid == "B") {
        (void)actions_from(io::field(p, "actions", w), w + ".actions");
        for (const char* key : {"decisionPair", "bfPair"}) {
            const auto pair = io::pair_from_json(io::field(p, key, w), w + "." + key);
            const auto rep = validate_partition(pair);
            if (!rep.valid) {
                std::string msg = w + "." + key + ": theta0 and theta1 must partition the parameter space";
                for (const auto& m : rep.messages) msg += "; " + m;
                throw ValidationError(msg);
            }
        }
        return nullptr;
    }
    if (sid == "C") {
        (void)io::boolean(p, "withinPriorsMatch", w);
        return nullptr;
    }
    if (sid == "D") {
        const double p0 = io::number(p, "p0", w);
        if (!(p0 > 0.0 && p0 < 1.0)) throw ValidationError(w + ".p0 must lie strictly between 0 and 1");
        if (rationale.find_first_not_of(" \t\r\n") == std::string::npos)
            throw ValidationError(w + ": report the information that leads to the prior probabilities (rationale is required)");
        return {{"priorOdds", p0 / (1.0 - p0)}};
    }
    if (sid == "E") {
        if (!io::boolean(p, "acknowledged", w))
            throw ValidationError(w + ": the hypothesis-based loss simplification must be explicitly acknowledged");
        (void)nonempty_text(p, "typeI", w);
        (void)nonempty_text(p, "typeII", w);
        const auto iv = io::interval_k_from_json(p, w);
        return {{"kLower", iv.k_lower}, {"kUpper", iv.k_upper}};
    }
    if (sid == "F") {
        if (io::has(p, "improperPrior") && io::boolean(p, "improperPrior", w))
            throw ImproperPriorError("the imported Bayes factor was computed with an improper prior; use the full guide");
        const BayesFactorValue bf = io::imported_bf_from_json(p, w);
        const double p0 = io::number(payload(doc, "D"), "p0", where("D"));
        const OddsValue prior = OddsValue::from_p0(p0);
        const OddsValue post = posterior_odds_from_bf(bf, prior);
        return {{"bayesFactor", io::to_json(bf)}, {"priorOdds", io::to_json(prior)}, {"posteriorOdds", io::to_json(post)}};
    }
    if (sid == "G") return nullptr;
    throw NotFoundError("unknown step " + sid);
}

inline void record(AnalysisDocument& doc, json event) {
    ++doc.version;
    event["revision"] = doc.version;
    doc.history.push_back(std::move(event));
}

inline void lock_now(AnalysisDocument& doc) {
    doc.pre_data_hash = pre_data_hash(doc);
    doc.status = Status::Locked;
}

inline bool computed_step(const AnalysisDocument& doc, const std::string& sid) {
    return sid == decision_step(doc.guide);
}

} // namespace detail

// Freezes the pre-data steps and records their hash. All of them must be complete.
inline void lock(AnalysisDocument& doc) {
    if (doc.status != Status::Draft) throw LockError("document " + doc.id + " is already locked");
    for (const auto& d : step_defs(doc.guide))
        if (d.pre_data && !doc.complete(d.id))
            throw DependencyError("cannot lock: step " + d.id + " (" + d.title + ") is not complete");
    detail::lock_now(doc);
    detail::record(doc, {{"event", "lock"}, {"preDataHash", *doc.pre_data_hash}});
}

inline DecisionOutcome run_decision(AnalysisDocument& doc);

// Validates and stores one step. On any error the document is left unchanged.
inline void submit_step(AnalysisDocument& doc, const std::string& sid, const json& payload, const std::string& rationale = "") {
    const StepDef& def = step_def(doc.guide, sid);
    if (def.pre_data && doc.status != Status::Draft)
        throw LockError("step " + sid + " (" + def.title + ") is part of the pre-data specification and the document is locked" +
                        (doc.pre_data_hash ? " (pre-data hash " + *doc.pre_data_hash + ")" : std::string()));
    for (const auto& r : def.requires_steps)
        if (!doc.complete(r))
            throw DependencyError("step " + sid + " (" + def.title + ") requires step " + r + " (" +
                                  step_def(doc.guide, r).title + ") to be complete");
    if (!payload.is_object()) throw ValidationError("step " + sid + ": payload must be a JSON object");

    AnalysisDocument next = doc;
    const json derived = doc.guide == Guide::Full ? detail::validate_full(doc, sid, payload, rationale)
                                                  : detail::validate_bf_guide(doc, sid, payload, rationale);
    StepRecord& rec = next.step(sid);
    const bool resubmit = rec.state != StepState::Pending;
    rec.payload = payload;
    rec.rationale = rationale;
    rec.derived = derived;
    rec.state = detail::computed_step(doc, sid) ? StepState::Pending : StepState::Complete;
    json event{{"event", "submit"}, {"step", sid}};
    if (resubmit) {
        json invalidated = json::array();
        for (const auto& dep : dependents(next.guide, sid)) {
            StepRecord& d = next.step(dep);
            if (d.state == StepState::Complete) {
                d.state = StepState::Invalidated;
                d.derived = nullptr;
                invalidated.push_back(dep);
            }
        }
        if (!invalidated.empty()) event["invalidated"] = invalidated;
    }
    if (sid == data_step(next.guide)) {
        if (next.status == Status::Draft) {
            detail::lock_now(next);
            event["preDataHash"] = *next.pre_data_hash;
        }
        next.status = Status::DataEntered;
    } else if ((next.status == Status::Decided || next.status == Status::WithheldPending) &&
               !next.complete(decision_step(next.guide))) {
        next.status = Status::DataEntered;
    }
    detail::record(next, event);
    if (detail::computed_step(next, sid)) {
        run_decision(next);
    }
    doc = std::move(next);
}

// Sensitivity of the outcome to the alternative priors listed in step 3.
inline json sensitivity(const AnalysisDocument& doc, const RobustLossInterval& iv, Outcome main) {
    json out = json::array();
    const json& p3 = detail::payload(doc, "3");
    if (!io::has(p3, "alternatives")) return out;
    const SamplingModel m = detail::model_with_data(doc);
    const HypothesisPair pair = detail::hypotheses(doc);
    for (const auto& aj : p3.at("alternatives")) {
        json row{{"prior", aj}};
        try {
            const Prior pr = io::prior_from_json(aj, "step 3.alternatives");
            const auto s = analyze(m, pr, pair);
            const auto d = optimal_action_robust(iv, OddsValue::from_probabilities(s.p0_post, s.p1_post));
            row["p0Post"] = s.p0_post;
            row["outcome"] = to_string(d.outcome);
            row["agrees"] = d.outcome == main;
        } catch (const Error& e) {
            row["error"] = e.code();
            row["message"] = e.what();
            row["agrees"] = false;
        }
        out.push_back(row);
    }
    return out;
}

// Computes the decision from the completed steps and records it in step 10 (or G).
inline DecisionOutcome run_decision(AnalysisDocument& doc) {
    const std::string sid = decision_step(doc.guide);
    const StepDef& def = step_def(doc.guide, sid);
    for (const auto& r : def.requires_steps)
        if (!doc.complete(r))
            throw DependencyError("step " + sid + " (" + def.title + ") requires step " + r + " (" +
                                  step_def(doc.guide, r).title + ") to be complete");
    AnalysisDocument next = doc;
    StepRecord& rec = next.step(sid);
    DecisionOutcome out;
    json derived;
    ActionPair actions;
    if (doc.guide == Guide::Full) {
        RobustLossInterval iv = detail::loss_interval(doc);
        if (rec.payload.is_object() && io::has(rec.payload, "narrowedInterval"))
            iv = io::interval_k_from_json(rec.payload.at("narrowedInterval"), "step 10.narrowedInterval");
        const json& post = doc.step("9").derived.at("posterior");
        const OddsValue odds = OddsValue::from_probabilities(post.at("p0Post").get<double>(), post.at("p1Post").get<double>());
        out = optimal_action_robust(iv, odds);
        attach_data_recommendation(out, detail::model_with_data(doc), detail::main_prior(doc), detail::hypotheses(doc), iv);
        actions = detail::actions_from(detail::payload(doc, "1"), "step 1");
        derived = {{"kLower", iv.k_lower}, {"kUpper", iv.k_upper}};
        derived["sensitivity"] = sensitivity(doc, iv, out.outcome);
    } else {
        const ApplicabilityReport app = applicability_checks(doc);
        if (!app.pass) {
            std::string msg = "the Bayes factor is not applicable to this decision problem";
            for (const auto& i : app.items)
                if (!i.pass) msg += "; " + i.message;
            throw ApplicabilityError(msg + "; " + kRestartAdvice);
        }
        const RobustLossInterval iv = detail::loss_interval(doc);
        const OddsValue odds = OddsValue::of(io::number(doc.step("F").derived, "posteriorOdds", "step F"));
        out = optimal_action_robust(iv, odds);
        actions = detail::actions_from(detail::payload(doc, "B").at("actions"), "step B.actions");
        derived = {{"kLower", iv.k_lower}, {"kUpper", iv.k_upper}};
    }
    derived["outcome"] = io::to_json(out);
    if (out.outcome == Outcome::ChooseA0) derived["action"] = actions.a0;
    else if (out.outcome == Outcome::ChooseA1) derived["action"] = actions.a1;
    else derived["action"] = nullptr;
    if (!rec.payload.is_object()) rec.payload = json::object();
    rec.derived = derived;
    rec.state = StepState::Complete;
    next.status = out.outcome == Outcome::Withheld ? Status::WithheldPending : Status::Decided;
    detail::record(next, {{"event", "decision"}, {"step", sid}, {"outcome", to_string(out.outcome)}});
    doc = std::move(next);
    return out;
}

// Runs the step-10 decision for every prior in step 3 and reports agreement.
inline json sensitivity_report(const AnalysisDocument& doc) {
    if (doc.guide != Guide::Full) throw ValidationError("sensitivity analysis needs the full guide");
    const auto& s10 = doc.step("10");
    if (s10.state != StepState::Complete) throw DependencyError("step 10 (Optimal action) is not complete");
    const json& rows = s10.derived.at("sensitivity");
    const bool all = std::all_of(rows.begin(), rows.end(), [](const json& r) { return r.at("agrees").get<bool>(); });
    return {{"mainOutcome", s10.derived.at("outcome").at("outcome")}, {"alternatives", rows}, {"allAgree", all}};
}

// ---------------------------------------------------------------------------
// Serialization

inline json to_json(const AnalysisDocument& doc) {
    json steps = json::array();
    for (const auto& s : doc.steps)
        steps.push_back({{"id", s.id},
                         {"title", s.title},
                         {"state", to_string(s.state)},
                         {"payload", s.payload},
                         {"rationale", s.rationale},
                         {"derived", s.derived}});
    return {{"schemaVersion", doc.schema_version},
            {"id", doc.id},
            {"version", doc.version},
            {"guide", to_string(doc.guide)},
            {"status", to_string(doc.status)},
            {"preDataHash", doc.pre_data_hash ? json(*doc.pre_data_hash) : json(nullptr)},
            {"steps", steps},
            {"history", doc.history}};
}

inline AnalysisDocument document_from_json(const json& j) {
    const std::string w = "document";
    if (io::integer(j, "schemaVersion", w) != kSchemaVersion)
        throw ValidationError("unsupported schemaVersion (expected " + std::to_string(kSchemaVersion) + ")");
    AnalysisDocument doc;
    doc.id = io::text(j, "id", w);
    doc.version = io::integer(j, "version", w);
    doc.guide = guide_from_string(io::text(j, "guide", w));
    doc.status = status_from_string(io::text(j, "status", w));
    if (io::has(j, "preDataHash")) doc.pre_data_hash = io::text(j, "preDataHash", w);
    const json& steps = io::field(j, "steps", w);
    const auto& defs = step_defs(doc.guide);
    if (!steps.is_array() || steps.size() != defs.size()) throw ValidationError("document.steps does not match the guide");
    for (std::size_t i = 0; i < defs.size(); ++i) {
        const json& s = steps[i];
        StepRecord r;
        r.id = io::text(s, "id", w + ".steps");
        if (r.id != defs[i].id) throw ValidationError("document.steps[" + std::to_string(i) + "] should be step " + defs[i].id);
        r.title = io::text(s, "title", w + ".steps");
        r.state = state_from_string(io::text(s, "state", w + ".steps"));
        r.payload = s.value("payload", json(nullptr));
        r.rationale = io::text(s, "rationale", w + ".steps");
        r.derived = s.value("derived", json(nullptr));
        doc.steps.push_back(std::move(r));
    }
    doc.history = io::field(j, "history", w);
    if (!doc.history.is_array()) throw ValidationError("document.history must be an array");
    return doc;
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

inline std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

inline std::string fmtj(const json& v) {
    if (v.is_number()) return fmt(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

inline bool withheld_at_some_point(const AnalysisDocument& doc) {
    for (const auto& e : doc.history)
        if (e.value("event", "") == "decision" && e.value("outcome", "") == "withheld") return true;
    return false;
}

inline void render_step_markdown(std::ostringstream& os, const AnalysisDocument& doc, const StepRecord& s) {
    os << "## Step " << s.id << ": " << s.title << "\n\n";
    os << "State: " << to_string(s.state) << "\n\n";
    if (s.state == StepState::Pending && s.payload.is_null()) return;
    const json& p = s.payload;
    if (doc.guide == Guide::Full) {
        if (s.id == "1") {
            os << "- a0: " << p.value("a0", "") << "\n- a1: " << p.value("a1", "") << "\n";
        } else if (s.id == "4") {
            os << "- Assumption acknowledged: the loss is constant within each hypothesis set\n";
        } else if (s.id == "6") {
            os << "- Type I error (a1 although theta in Theta0): " << p.value("typeI", "") << "\n";
            os << "- Type II error (a0 although theta in Theta1): " << p.value("typeII", "") << "\n";
        } else if (s.id == "7") {
            os << "- K lower: " << fmtj(p.at("kLower")) << "\n- K upper: " << fmtj(p.at("kUpper")) << "\n";
        } else if (s.id == "9" && s.derived.is_object()) {
            const json& post = s.derived.at("posterior");
            os << "- P(H0|x) = " << fmtj(post.at("p0Post")) << "\n- P(H1|x) = " << fmtj(post.at("p1Post")) << "\n";
            os << "- Posterior odds = " << fmtj(post.at("posteriorOdds")) << "\n";
            if (s.derived.at("priorP0").is_null()) os << "- Prior P(H0) is not defined (improper prior)\n";
            else os << "- Prior P(H0) = " << fmtj(s.derived.at("priorP0")) << "\n";
            const json& bf = s.derived.at("bayesFactor");
            if (bf.contains("bf")) os << "- Bayes factor BF01 = " << fmtj(bf.at("bf")) << "\n";
            else os << "- Bayes factor not reported: " << bf.value("message", "") << "\n";
        } else {
            os << "```json\n" << p.dump(2) << "\n```\n";
        }
    } else {
        if (s.id == "E") {
            os << "- Assumption acknowledged: the loss is constant within each hypothesis set\n";
            os << "- Type I error: " << p.value("typeI", "") << "\n- Type II error: " << p.value("typeII", "") << "\n";
            os << "- K lower: " << fmtj(p.at("kLower")) << "\n- K upper: " << fmtj(p.at("kUpper")) << "\n";
        } else if (s.id == "F" && s.derived.is_object()) {
            os << "- Imported Bayes factor BF01 = " << fmtj(s.derived.at("bayesFactor").at("bf")) << "\n";
            os << "- Prior odds = " << fmtj(s.derived.at("priorOdds")) << "\n";
            os << "- Posterior odds = " << fmtj(s.derived.at("posteriorOdds")) << "\n";
        } else if (s.id != "G") {
            os << "```json\n" << p.dump(2) << "\n```\n";
        }
    }
    if (s.id == decision_step(doc.guide) && s.state == StepState::Complete) {
        const json& d = s.derived;
        const json& o = d.at("outcome");
        os << "- K interval used: [" << fmtj(d.at("kLower")) << ", " << fmtj(d.at("kUpper")) << "]\n";
        os << "- rho(K lower) = " << fmtj(o.at("rhoLower")) << "\n- rho(K upper) = " << fmtj(o.at("rhoUpper")) << "\n";
        os << "- Flip threshold k* = " << fmtj(o.at("flipThreshold")) << "\n";
        os << "- Outcome: " << o.at("outcome").get<std::string>();
        if (!d.at("action").is_null()) os << " (" << d.at("action").get<std::string>() << ")";
        os << "\n";
        if (o.at("boundaryDecided").get<bool>()) os << "- The deciding value of rho equals one (boundary case)\n";
        if (!o.at("recommendation").is_null()) {
            const json& r = o.at("recommendation");
            os << "- Recommendation: " << r.at("advice").get<std::string>() << "; raise K lower above "
               << fmtj(r.at("raiseLowerTo")) << " or lower K upper below " << fmtj(r.at("lowerUpperTo")) << "\n";
        }
        if (d.contains("sensitivity") && !d.at("sensitivity").empty()) {
            os << "- Sensitivity to alternative priors:\n";
            for (const auto& row : d.at("sensitivity")) {
                os << "  - " << row.at("prior").dump() << ": ";
                if (row.contains("outcome")) os << row.at("outcome").get<std::string>();
                else os << "error " << row.at("error").get<std::string>();
                os << (row.at("agrees").get<bool>() ? " (agrees)" : " (differs)") << "\n";
            }
        }
    }
    if (!s.rationale.empty()) os << "\nRationale: " << s.rationale << "\n";
    os << "\n";
}

} // namespace detail

// Deterministic report: Markdown with a JSON appendix, or the JSON record alone.
inline std::string render_report(const AnalysisDocument& doc, const std::string& format = "markdown") {
    const bool any = std::any_of(doc.steps.begin(), doc.steps.end(), [](const auto& s) { return !s.payload.is_null(); });
    if (!any) throw ValidationError("report needs at least one completed step");
    if (format == "json") {
        json j{{"document", to_json(doc)}, {"withheldAtFirst", detail::withheld_at_some_point(doc)}};
        if (doc.guide == Guide::FromBayesFactor) j["applicability"] = to_json(applicability_checks(doc));
        return j.dump(2) + "\n";
    }
    if (format != "markdown" && format != "md") throw ValidationError("unsupported report format '" + format + "'");
    std::ostringstream os;
    os << "# Decision analysis " << doc.id << "\n\n";
    os << "- Guide: " << to_string(doc.guide) << "\n- Status: " << to_string(doc.status) << "\n- Version: " << doc.version
       << "\n";
    if (doc.pre_data_hash) os << "- Pre-data specification SHA-256: " << *doc.pre_data_hash << "\n";
    os << "\n";
    if (detail::withheld_at_some_point(doc)) {
        os << "> Disclosure: a decision was withheld at first because rho(K lower) < 1 < rho(K upper). "
              "This is reported transparently together with every later step.\n\n";
    }
    if (doc.guide == Guide::FromBayesFactor) {
        const auto app = applicability_checks(doc);
        os << "## Applicability checklist: " << (app.pass ? "PASS" : "FAIL") << "\n\n";
        for (const auto& i : app.items) os << "- [" << (i.pass ? "PASS" : "FAIL") << "] Step " << i.step << ": " << i.message << "\n";
        if (!app.pass) os << "\nRecommendation: " << app.recommendation << "\n";
        os << "\n";
    }
    for (const auto& s : doc.steps) detail::render_step_markdown(os, doc, s);
    os << "## Appendix: machine-readable record\n\n```json\n" << to_json(doc).dump(2) << "\n```\n";
    return os.str();
}

} // namespace bfd::workflow
