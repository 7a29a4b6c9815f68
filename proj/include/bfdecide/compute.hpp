#pragma once

// Stateless operations on JSON requests. The CLI spec files and the service
// bodies share these shapes:
//
//   {"model": {...}, "prior": {...}, "hypotheses": {...},
//    "kLower": 0.5, "kUpper": 2}
//
// A decision may instead take its odds from {"bf": 2.5, "p0": 0.6} (or
// "priorOdds") or from {"posteriorOdds": 3.75}; a single "k" stands for
// kLower = kUpper = k.

#include <optional>
#include <string>
#include <vector>

#include "bfdecide/bayes_factor.hpp"
#include "bfdecide/decision.hpp"
#include "bfdecide/errors.hpp"
#include "bfdecide/inference.hpp"
#include "bfdecide/json_io.hpp"

namespace bfd::compute {

using io::json;

struct ModelSpec {
    SamplingModel model;
    Prior prior;
    std::optional<HypothesisPair> pair;
};

inline ModelSpec model_spec(const json& req) {
    const SamplingModel m = io::model_from_json(io::field(req, "model", "request"), "request.model");
    const Prior pr = io::prior_from_json(io::field(req, "prior", "request"), "request.prior");
    std::optional<HypothesisPair> pair;
    if (io::has(req, "hypotheses")) pair = io::pair_from_json(req.at("hypotheses"), "request.hypotheses", parameter_space(m));
    return {m, pr, pair};
}

inline HypothesisPair require_pair(const ModelSpec& s) {
    if (!s.pair) throw ValidationError("request: missing field 'hypotheses'");
    const auto rep = validate_partition(*s.pair);
    if (!rep.valid) {
        std::string msg = "request.hypotheses: theta0 and theta1 must partition the parameter space";
        for (const auto& m : rep.messages) msg += "; " + m;
        throw ValidationError(msg);
    }
    return *s.pair;
}

inline PosteriorOptions posterior_options(const json& req) {
    PosteriorOptions o;
    if (io::has(req, "forceGrid")) o.force_grid = io::boolean(req, "forceGrid", "request");
    if (io::has(req, "gridNodes")) {
        const long n = io::integer(req, "gridNodes", "request");
        if (n < 16 || n > 1'000'000) throw ValidationError("request.gridNodes must lie in [16, 1000000]");
        o.grid_nodes = static_cast<std::size_t>(n);
    }
    return o;
}

inline RobustLossInterval loss_interval(const json& req) {
    if (io::has(req, "k")) {
        const double k = io::number(req, "k", "request");
        if (!(k > 0.0) || !std::isfinite(k)) throw ValidationError("request.k must be positive and finite");
        return RobustLossInterval::precise(k);
    }
    if (io::has(req, "loss")) {
        const json& l = req.at("loss");
        const SimplifiedLoss sl(io::number(l, "k0", "request.loss"), io::number(l, "k1", "request.loss"));
        return RobustLossInterval::precise(sl.ratio());
    }
    return io::interval_k_from_json(req, "request");
}

// ---------------------------------------------------------------------------

inline json posterior(const json& req) {
    const ModelSpec s = model_spec(req);
    const PosteriorOptions opt = posterior_options(req);
    const bool include_grid = io::has(req, "includeGrid") && io::boolean(req, "includeGrid", "request");
    json out;
    if (s.pair) {
        const PosteriorSummary sum = analyze(s.model, s.prior, require_pair(s), opt);
        out = io::to_json(sum);
    } else {
        out = io::to_json(posterior_update(s.model, s.prior, opt));
    }
    if (!include_grid) out.erase("grid");
    return out;
}

inline json bayes_factor(const json& req) {
    const SamplingModel m = io::model_from_json(io::field(req, "model", "request"), "request.model");
    if (io::has(req, "within0") || io::has(req, "within1")) {
        const auto w0 = io::within_from_json(io::field(req, "within0", "request"), "request.within0");
        const auto w1 = io::within_from_json(io::field(req, "within1", "request"), "request.within1");
        return io::to_json(bfd::bayes_factor(m, w0, w1));
    }
    const ModelSpec s = model_spec(req);
    const HypothesisPair pair = require_pair(s);
    const BayesFactorValue bf = bfd::bayes_factor(s.model, s.prior, pair);
    json out = io::to_json(bf);
    const auto po = prior_odds(s.prior, pair);
    out["priorOdds"] = po ? io::to_json(*po) : json(nullptr);
    out["posteriorOdds"] = po && po->finite_positive() ? io::to_json(posterior_odds_from_bf(bf, po)) : json(nullptr);
    return out;
}

struct ResolvedOdds {
    OddsValue odds;
    std::optional<ModelSpec> spec;  // set when the odds came from a model and prior
    json detail;
};

inline ResolvedOdds resolve_odds(const json& req) {
    ResolvedOdds r;
    if (io::has(req, "posteriorOdds")) {
        r.odds = OddsValue::of(io::number(req, "posteriorOdds", "request"));
        r.detail = {{"source", "posterior_odds"}};
        return r;
    }
    if (io::has(req, "bf")) {
        const BayesFactorValue bf = io::imported_bf_from_json(req, "request");
        OddsValue prior;
        if (io::has(req, "p0")) {
            const double p0 = io::number(req, "p0", "request");
            if (!(p0 >= 0.0 && p0 <= 1.0)) throw ValidationError("request.p0 must lie in [0, 1]");
            prior = OddsValue::from_p0(p0);
        } else if (io::has(req, "priorOdds")) {
            prior = OddsValue::of(io::number(req, "priorOdds", "request"));
        } else {
            throw ValidationError("request: a Bayes factor needs 'p0' or 'priorOdds'");
        }
        if (io::has(req, "improperPrior") && io::boolean(req, "improperPrior", "request"))
            throw ImproperPriorError("the Bayes factor was computed with an improper prior");
        r.odds = posterior_odds_from_bf(bf, prior, true);
        r.detail = {{"source", "bayes_factor"}, {"bf", io::num(bf.value)}, {"priorOdds", io::to_json(prior)}};
        return r;
    }
    if (io::has(req, "model")) {
        ModelSpec s = model_spec(req);
        const HypothesisPair pair = require_pair(s);
        const PosteriorSummary sum = analyze(s.model, s.prior, pair, posterior_options(req));
        r.odds = OddsValue::from_probabilities(sum.p0_post, sum.p1_post);
        r.detail = {{"source", "posterior"}, {"p0Post", sum.p0_post}, {"p1Post", sum.p1_post}};
        r.spec = std::move(s);
        return r;
    }
    throw ValidationError("request: give 'posteriorOdds', 'bf' with 'p0', or 'model', 'prior' and 'hypotheses'");
}

inline DecisionOutcome decide(const json& req) {
    const RobustLossInterval iv = loss_interval(req);
    const ResolvedOdds r = resolve_odds(req);
    DecisionOutcome d = optimal_action_robust(iv, r.odds);
    if (r.spec) attach_data_recommendation(d, r.spec->model, r.spec->prior, *r.spec->pair, iv);
    return d;
}

inline json decision(const json& req) { return io::to_json(decide(req)); }

// Grid text "lo:hi:n:log" (or "lo:hi:n" for linear spacing).
inline std::vector<double> parse_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if (parts.size() != 3 && parts.size() != 4) throw ValidationError("grid must look like lo:hi:n or lo:hi:n:log");
    double lo = 0, hi = 0;
    long n = 0;
    try {
        std::size_t used = 0;
        lo = std::stod(parts[0], &used);
        if (used != parts[0].size()) throw std::invalid_argument("lo");
        hi = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("hi");
        n = std::stol(parts[2], &used);
        if (used != parts[2].size()) throw std::invalid_argument("n");
    } catch (const std::exception&) {
        throw ValidationError("grid '" + text + "': expected numbers lo:hi:n");
    }
    bool log_spaced = false;
    if (parts.size() == 4) {
        if (parts[3] == "log") log_spaced = true;
        else if (parts[3] != "lin" && parts[3] != "linear") throw ValidationError("grid spacing must be 'log' or 'lin'");
    }
    if (n < 1 || n > 1'000'000) throw ValidationError("grid size must lie in [1, 1000000]");
    try {
        return make_grid(lo, hi, static_cast<std::size_t>(n), log_spaced);
    } catch (const DomainError& e) {
        throw ValidationError(std::string("grid '") + text + "': " + e.what());
    }
}

inline std::vector<double> sweep_grid(const json& req, const std::string& fallback) {
    if (io::has(req, "values")) return io::numbers(req, "values", "request");
    if (io::has(req, "grid")) {
        const json& g = req.at("grid");
        if (g.is_string()) return parse_grid(g.get<std::string>());
        const bool lg = io::has(g, "log") && io::boolean(g, "log", "request.grid");
        return make_grid(io::number(g, "lo", "request.grid"), io::number(g, "hi", "request.grid"),
                         static_cast<std::size_t>(io::integer(g, "n", "request.grid")), lg);
    }
    return parse_grid(fallback);
}

// "sweep": "k" (default) varies k at the request's odds; "odds" varies the
// posterior odds for the request's [kLower, kUpper].
inline SweepResult sweep(const json& req) {
    const std::string what = io::has(req, "sweep") ? io::text(req, "sweep", "request") : "k";
    if (what == "k") return sweep_k(sweep_grid(req, "0.001:1000:121:log"), resolve_odds(req).odds);
    if (what == "odds") return sweep_odds(sweep_grid(req, "0.001:1000:121:log"), io::interval_k_from_json(req, "request"));
    throw ValidationError("request.sweep must be 'k' or 'odds'");
}

inline json sweep_json(const json& req) { return io::to_json(sweep(req)); }

// Shortest round-trip text for a TSV cell.
inline std::string cell(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    return json(v).dump();
}

inline std::string sweep_tsv(const SweepResult& r, const std::string& what) {
    std::string out = "# thresholds:";
    for (double t : r.thresholds) out += " " + cell(t);
    out += "\n";
    out += what == "odds" ? "odds\toutcome\trho_lower\trho_upper\n" : "k\toutcome\trho\n";
    for (const auto& p : r.points) {
        out += cell(p.value) + "\t" + to_string(p.outcome) + "\t" + cell(p.rho_lower);
        if (what == "odds") out += "\t" + cell(p.rho_upper);
        out += "\n";
    }
    return out;
}

} // namespace bfd::compute
