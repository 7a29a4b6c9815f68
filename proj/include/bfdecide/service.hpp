#pragma once

// HTTP routing without a transport. `Service::handle` maps a request to one
// module operation and serializes its result; the server binary and the tests
// both go through it.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <regex>
#include <string>

#include "bfdecide/compute.hpp"
#include "bfdecide/errors.hpp"
#include "bfdecide/json_io.hpp"
#include "bfdecide/plotdata.hpp"
#include "bfdecide/store.hpp"
#include "bfdecide/workflow.hpp"

namespace bfd::service {

using io::json;

struct Request {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::map<std::string, std::string> headers;  // lowercase names
    std::string body;
};

struct Response {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
    std::map<std::string, std::string> headers;
};

inline int status_for(const Error& e) {
    const std::string& c = e.code();
    if (c == "validation_error") return 400;
    if (c == "not_found") return 404;
    if (c == "locked" || c == "version_conflict" || c == "dependency_error") return 409;
    return 422;
}

inline Response json_response(int status, const json& body) { return {status, "application/json", body.dump(), {}}; }

inline Response error_response(int status, const std::string& code, const std::string& message) {
    return json_response(status, {{"error", {{"code", code}, {"message", message}}}});
}

class Service {
public:
    explicit Service(DocumentStore& store, std::uint64_t id_seed = std::random_device{}()) : store_(store), rng_(id_seed) {}

    Response handle(const Request& req) {
        try {
            return route(req);
        } catch (const Error& e) {
            return error_response(status_for(e), e.code(), e.what());
        } catch (const nlohmann::json::exception& e) {
            return error_response(400, "validation_error", e.what());
        } catch (const std::exception& e) {
            return error_response(500, "internal_error", e.what());
        }
    }

private:
    Response route(const Request& req) {
        static const std::regex doc_re("^/analyses/([A-Za-z0-9_-]+)$");
        static const std::regex step_re("^/analyses/([A-Za-z0-9_-]+)/steps/([A-Za-z0-9]+)$");
        static const std::regex action_re("^/analyses/([A-Za-z0-9_-]+)/(decision|report|plotdata|lock|applicability|sensitivity)$");
        std::smatch m;
        const std::string& p = req.path;
        const std::string& mt = req.method;

        if (p == "/health" && mt == "GET") return json_response(200, {{"status", "ok"}});
        if (p == "/analyses" && mt == "POST") return create(req);
        if (p == "/compute/posterior" && mt == "POST") return json_response(200, compute::posterior(body(req)));
        if (p == "/compute/bayes-factor" && mt == "POST") return json_response(200, compute::bayes_factor(body(req)));
        if (p == "/compute/decision" && mt == "POST") return json_response(200, compute::decision(body(req)));
        if (p == "/compute/sweep" && mt == "POST") return json_response(200, compute::sweep_json(body(req)));
        if (std::regex_match(p, m, doc_re) && mt == "GET") return with_etag(store_.load(m[1]));
        if (std::regex_match(p, m, step_re) && mt == "PUT") return submit(req, m[1], m[2]);
        if (std::regex_match(p, m, action_re)) {
            const std::string id = m[1], what = m[2];
            if (what == "decision" && mt == "POST") return decide(req, id);
            if (what == "lock" && mt == "POST") return lock(req, id);
            if (what == "report" && mt == "GET") return report(req, id);
            if (what == "plotdata" && mt == "GET") return plotdata(req, id);
            if (what == "applicability" && mt == "GET")
                return json_response(200, workflow::to_json(workflow::applicability_checks(store_.load(id))));
            if (what == "sensitivity" && mt == "GET")
                return json_response(200, workflow::sensitivity_report(store_.load(id)));
        }
        const bool known = p == "/analyses" || p.rfind("/compute/", 0) == 0 || std::regex_match(p, doc_re) ||
                           std::regex_match(p, step_re) || std::regex_match(p, action_re);
        if (known) return error_response(405, "method_not_allowed", mt + " is not supported on " + p);
        return error_response(404, "not_found", "no route for " + p);
    }

    static json body(const Request& req) {
        json j = io::parse(req.body.empty() ? std::string("{}") : req.body);
        if (!j.is_object()) throw ValidationError("request body must be a JSON object");
        return j;
    }

    static Response with_etag(const workflow::AnalysisDocument& doc, int status = 200) {
        Response r = json_response(status, workflow::to_json(doc));
        r.headers["ETag"] = "\"" + std::to_string(doc.version) + "\"";
        return r;
    }

    static std::optional<long> if_match(const Request& req) {
        auto it = req.headers.find("if-match");
        if (it == req.headers.end()) return std::nullopt;
        std::string v = it->second;
        if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
        try {
            std::size_t used = 0;
            const long n = std::stol(v, &used);
            if (used == v.size()) return n;
        } catch (const std::exception&) {
        }
        throw ValidationError("If-Match must carry a document version number");
    }

    std::mutex& doc_mutex(const std::string& id) {
        std::lock_guard lk(mu_);
        auto& p = doc_mutexes_[id];
        if (!p) p = std::make_unique<std::mutex>();
        return *p;
    }

    // Read-modify-write under the per-document writer lock.
    template <class F>
    workflow::AnalysisDocument mutate(const Request& req, const std::string& id, F&& f) {
        std::lock_guard lk(doc_mutex(id));
        workflow::AnalysisDocument doc = store_.load(id);
        const long seen = doc.version;
        if (auto want = if_match(req); want && *want != seen)
            throw VersionConflict("document " + id + " is at version " + std::to_string(seen) + ", not " + std::to_string(*want));
        f(doc);
        store_.save(doc, seen);
        return doc;
    }

    std::string new_id() {
        std::lock_guard lk(mu_);
        static const char* hex = "0123456789abcdef";
        for (;;) {
            std::string id;
            for (int i = 0; i < 16; ++i) id += hex[rng_() & 15];
            if (!store_.exists(id)) return id;
        }
    }

    Response create(const Request& req) {
        const json b = body(req);
        const std::string guide = io::has(b, "guide") ? io::text(b, "guide", "request") : "full";
        std::string id = io::has(b, "id") ? io::text(b, "id", "request") : new_id();
        store_detail::check_id(id);
        std::lock_guard lk(doc_mutex(id));
        if (store_.exists(id)) throw VersionConflict("analysis '" + id + "' already exists");
        const auto doc = workflow::create_analysis(guide, id);
        store_.save(doc, 0);
        Response r = with_etag(doc, 201);
        r.headers["Location"] = "/analyses/" + id;
        return r;
    }

    Response submit(const Request& req, const std::string& id, const std::string& sid) {
        const json b = body(req);
        const json& payload = io::field(b, "payload", "request");
        const std::string rationale = io::has(b, "rationale") ? io::text(b, "rationale", "request") : "";
        return with_etag(mutate(req, id, [&](auto& doc) { workflow::submit_step(doc, sid, payload, rationale); }));
    }

    Response decide(const Request& req, const std::string& id) {
        DecisionOutcome out;
        const auto doc = mutate(req, id, [&](auto& d) { out = workflow::run_decision(d); });
        Response r = json_response(200, io::to_json(out));
        r.headers["ETag"] = "\"" + std::to_string(doc.version) + "\"";
        return r;
    }

    Response lock(const Request& req, const std::string& id) {
        return with_etag(mutate(req, id, [](auto& doc) { workflow::lock(doc); }));
    }

    Response report(const Request& req, const std::string& id) {
        auto it = req.query.find("format");
        const std::string fmt = it == req.query.end() ? "markdown" : it->second;
        const std::string text = workflow::render_report(store_.load(id), fmt);
        return {200, fmt == "json" ? "application/json" : "text/markdown; charset=utf-8", text, {}};
    }

    Response plotdata(const Request& req, const std::string& id) {
        auto it = req.query.find("figure");
        if (it == req.query.end()) throw ValidationError("query parameter 'figure' is required");
        const json spec = spec_from_document(store_.load(id));
        return {200, "text/tab-separated-values", plot::figure(it->second, spec), {}};
    }

public:
    // Compute-request view of a document: model (with data once entered),
    // prior, hypotheses and loss interval, as far as they are complete.
    static json spec_from_document(const workflow::AnalysisDocument& doc) {
        if (doc.guide != workflow::Guide::Full) throw ValidationError("plot data needs a full-guide document");
        json spec = json::object();
        if (doc.complete("8")) spec["model"] = doc.step("8").derived.at("model");
        else if (doc.complete("2")) {
            // No data yet: the prior figures only need the parameter space.
            json m = doc.step("2").payload;
            const std::string fam = m.at("family");
            if (fam == "normal_known_variance") {
                m["n"] = 1;
                m["mean"] = 0.0;
            } else if (fam == "binomial") {
                m["n"] = 1;
                m["successes"] = 0;
            }
            spec["model"] = m;
        }
        if (doc.complete("3")) spec["prior"] = doc.step("3").payload.at("prior");
        if (doc.complete("5")) spec["hypotheses"] = doc.step("5").derived.at("hypotheses");
        if (doc.complete("7")) {
            spec["kLower"] = doc.step("7").payload.at("kLower");
            spec["kUpper"] = doc.step("7").payload.at("kUpper");
        }
        return spec;
    }

private:
    DocumentStore& store_;
    std::mutex mu_;
    std::map<std::string, std::unique_ptr<std::mutex>> doc_mutexes_;
    std::mt19937_64 rng_;
};

} // namespace bfd::service
