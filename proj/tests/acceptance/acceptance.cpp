// Acceptance gate. One line per criterion:  PASS|FAIL  name  detail  [time]
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bfdecide/bfdecide.hpp"
#include "../unit/oracles.hpp"

using namespace bfd;
using bfd::io::json;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            if (ok) detail << "first failure: " << what << "; ";
            ok = false;
        }
    }
};

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

int failures = 0;

void run(const std::string& name, const std::function<void(Check&)>& body) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.require(false, std::string("unexpected exception: ") + e.what());
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (!c.ok) ++failures;
    std::printf("%s  %-34s %s [%.1f ms]\n", c.ok ? "PASS" : "FAIL", name.c_str(), c.detail.str().c_str(), ms);
    std::fflush(stdout);
}

HypothesisPair unit_interval_pair() { return HypothesisPair::interval_vs_complement(-1.0, 1.0); }

// Flat improper prior c = 0.2, N(theta, 1) data with n = 10 and mean 0.5, H0: [-1, 1].
void flat_prior_scenario(Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const SamplingModel m = NormalKnownVariance(1.0, 10, 0.5);
    const Prior prior = Prior::flat(0.2);
    const auto pair = unit_interval_pair();
    const auto s = analyze(m, prior, pair);

    const json post = io::to_json(s.posterior);
    const json& d = post.at("density");
    c.require(d.at("family") == "normal", "posterior is not reported as a normal density");
    c.require(std::abs(d.at("mu").get<double>() - 0.5) < 1e-12, "posterior mean != 0.5");
    c.require(std::abs(d.at("sigma2").get<double>() - 0.1) < 1e-12, "posterior variance != 0.1");

    const double oracle = phi(std::sqrt(10.0) * 0.5) - phi(-std::sqrt(10.0) * 1.5);
    const double err = std::abs(s.p0_post - oracle);
    c.require(err < 1e-6, "P(H0|x) differs from the normal CDF oracle");

    bool refused = false;
    try {
        (void)bayes_factor(m, prior, pair);
    } catch (const ImproperPriorError& e) {
        refused = e.code() == "improper_prior_bf";
    }
    c.require(refused, "Bayes factor was not refused with improper_prior_bf");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.require(secs < 1.0, "runtime above 1 s");
    c.detail << "posterior N(" << d.at("mu").get<double>() << ", " << d.at("sigma2").get<double>() << ") P(H0|x)="
             << s.p0_post << " |err|=" << err << " bf=refused(improper_prior_bf) t=" << secs << "s";
}

// N(0, 1) prior with H0: [-1, 1].
void normal_prior_decomposition(Check& c) {
    const auto pair = unit_interval_pair();
    const Prior prior = Prior::normal(0.0, 1.0);
    const auto m = prior_hypothesis_probabilities(prior, pair);
    const double oracle = phi(1.0) - phi(-1.0);
    c.require(m.defined() && std::abs(*m.p0 - oracle) < 1e-6, "P(H0) differs from the normal CDF oracle");

    const auto d = decompose(prior, pair);
    double id_err = 0.0, trip_err = 0.0;
    const Prior back = recompose(d.p0, d.within0, d.within1);
    const auto k = resolve(back, pair.space);
    const auto again = decompose(back, pair);
    for (int i = 0; i < 4096; ++i) {
        const double t = -6.0 + 12.0 * i / 4095.0;
        const double pdf = oracle::normal_pdf(t, 0.0, 1.0);
        id_err = std::max(id_err, std::abs(pdf - (d.p0 * d.within0.pdf(t) + d.p1 * d.within1.pdf(t))));
        trip_err = std::max(trip_err, std::abs(std::exp(k.log_density(t)) - pdf));
        trip_err = std::max(trip_err, std::abs(again.within0.pdf(t) - d.within0.pdf(t)));
        trip_err = std::max(trip_err, std::abs(again.within1.pdf(t) - d.within1.pdf(t)));
    }
    trip_err = std::max(trip_err, std::abs(again.p0 - d.p0));
    c.require(id_err < 1e-8, "decomposition identity error above 1e-8");
    c.require(trip_err < 1e-8, "round trip error above 1e-8");
    c.detail << "P(H0)=" << *m.p0 << " |err|=" << std::abs(*m.p0 - oracle) << " identity=" << id_err
             << " roundtrip=" << trip_err << " nodes=4096";
}

// Posterior odds computed directly against BF x prior odds on random conjugate problems.
void bf_prior_odds_consistency(Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int normal_cases = 0, beta_cases = 0;
    double worst = 0.0;
    auto record = [&](const SamplingModel& model, const Prior& prior, const HypothesisPair& pair) {
        const auto s = analyze(model, prior, pair);
        const double direct = s.p0_post / s.p1_post;
        const auto po = posterior_odds_from_bf(bayes_factor(model, prior, pair), prior_odds(prior, pair));
        const double e = rel(po.value, direct);
        worst = std::max(worst, e);
        c.require(e < 1e-6, "relative error above 1e-6");
    };
    while (normal_cases < 100) {
        const double mu = -2.0 + 4.0 * u(rng), tau2 = 0.2 + 4.0 * u(rng);
        double a = -3.0 + 6.0 * u(rng), b = -3.0 + 6.0 * u(rng);
        if (a > b) std::swap(a, b);
        const auto pair = HypothesisPair::interval_vs_complement(a, b);
        const Prior prior = Prior::normal(mu, tau2);
        const double p0 = *prior_hypothesis_probabilities(prior, pair).p0;
        if (p0 < 0.05 || p0 > 0.95) continue;
        const double sigma2 = 0.2 + 3.0 * u(rng);
        const long n = 1 + static_cast<long>(u(rng) * 40);
        const double theta = mu + std::sqrt(tau2) * (2.0 * u(rng) - 1.0);
        const double xbar = theta + std::sqrt(sigma2 / n) * (2.0 * u(rng) - 1.0);
        record(NormalKnownVariance(sigma2, n, xbar), prior, pair);
        ++normal_cases;
    }
    while (beta_cases < 100) {
        const double al = 0.5 + 5.0 * u(rng), be = 0.5 + 5.0 * u(rng);
        const double cut = 0.05 + 0.9 * u(rng);
        HypothesisPair pair;
        pair.space = ParameterSpace(0.0, 1.0);
        pair.theta0 = IntervalUnion{Interval::closed(0.0, cut)};
        pair.theta1 = IntervalUnion{Interval::make(cut, 1.0, false, true)};
        const Prior prior = Prior::beta(al, be);
        const double p0 = *prior_hypothesis_probabilities(prior, pair).p0;
        if (p0 < 0.05 || p0 > 0.95) continue;
        const long n = 1 + static_cast<long>(u(rng) * 50);
        const double theta = u(rng);
        long succ = 0;
        for (long i = 0; i < n; ++i) succ += u(rng) < theta ? 1 : 0;
        record(Binomial(n, succ), prior, pair);
        ++beta_cases;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.require(secs < 60.0, "runtime above 60 s");
    c.detail << "normal-normal=" << normal_cases << " beta-binomial=" << beta_cases << " max rel err=" << worst
             << " t=" << secs << "s";
}

// Three-valued rule against precise decisions at 1000 interior points and both ends of [K lower, K upper].
void robust_rule_equivalence(Check& c) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> lk(-5.0, 5.0), width(0.0, 4.0), shift(-0.5, 1.0);
    const int triples = 3000, interior = 1000;
    int disagreements = 0, interior_only_disagreements = 0;
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < triples; ++i) {
        const double kl = std::exp(lk(rng));
        const double ku = kl * std::exp(width(rng));
        double odds;
        // A third of the triples put the flip threshold near or inside the interval.
        if (i % 3 == 0) odds = 1.0 / (kl * std::exp(shift(rng) * std::log(ku / kl + 1.0)));
        else odds = std::exp(lk(rng));
        const OddsValue o = OddsValue::of(odds);
        const auto robust = optimal_action_robust({kl, ku}, o).outcome;

        bool a0 = false, a1 = false, a0_in = false, a1_in = false;
        for (int j = 0; j <= interior + 1; ++j) {
            const double k = j == 0 ? kl : j == interior + 1 ? ku : kl + (ku - kl) * j / (interior + 1.0);
            const Outcome p = optimal_action_precise(k, o);
            a0 |= p == Outcome::ChooseA0;
            a1 |= p == Outcome::ChooseA1;
            if (j > 0 && j <= interior) {
                a0_in |= p == Outcome::ChooseA0;
                a1_in |= p == Outcome::ChooseA1;
            }
        }
        auto expected = [](bool x0, bool x1) {
            return x0 && x1 ? Outcome::Withheld : x0 ? Outcome::ChooseA0 : x1 ? Outcome::ChooseA1 : Outcome::Indifferent;
        };
        if (robust != expected(a0, a1)) ++disagreements;
        if (robust != expected(a0_in, a1_in)) ++interior_only_disagreements;
        counts[robust == Outcome::ChooseA0 ? 0 : robust == Outcome::ChooseA1 ? 1 : 2]++;
    }
    c.require(disagreements == 0, std::to_string(disagreements) + " disagreements");
    c.require(counts[0] > 0 && counts[1] > 0 && counts[2] > 0, "sample did not cover all three outcomes");
    c.detail << "triples=" << triples << " points=" << interior << "+2 ends disagreements=" << disagreements
             << " (a0=" << counts[0] << " a1=" << counts[1] << " withheld=" << counts[2]
             << "; interior-only scan resolution misses=" << interior_only_disagreements << ")";
}

void invariance_suite(Check& c) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double p0_dev = 0.0, swap_dev = 0.0;
    int argmin_changes = 0, scenarios = 0;

    auto bf_checks = [&](const SamplingModel& m, const HypothesisPair& pair, const Decomposition& d) {
        const double ref = bayes_factor(m, recompose(0.5, d.within0, d.within1), pair).value;
        for (double p0 : {0.1, 0.5, 0.9}) {
            const double bf = bayes_factor(m, recompose(p0, d.within0, d.within1), pair).value;
            p0_dev = std::max(p0_dev, rel(bf, ref));
        }
        const double fwd = bayes_factor(m, d.within0, d.within1).value;
        const double rev = bayes_factor(m, d.within1, d.within0).value;
        swap_dev = std::max(swap_dev, rel(rev, 1.0 / fwd));
        const double rev_pair = bayes_factor(m, recompose(0.5, d.within0, d.within1), pair.swapped()).value;
        swap_dev = std::max(swap_dev, rel(rev_pair, 1.0 / ref));
        ++scenarios;
    };
    bf_checks(NormalKnownVariance(1.0, 10, 0.5), unit_interval_pair(), decompose(Prior::normal(0, 1), unit_interval_pair()));
    for (int i = 0; i < 30; ++i) {
        double a = -2.0 + 4.0 * u(rng), b = -2.0 + 4.0 * u(rng);
        if (a > b) std::swap(a, b);
        const auto pair = HypothesisPair::interval_vs_complement(a, b);
        const Prior pr = Prior::normal(-1.0 + 2.0 * u(rng), 0.3 + 3.0 * u(rng));
        const auto m0 = prior_hypothesis_probabilities(pr, pair);
        if (*m0.p0 < 1e-3 || *m0.p1 < 1e-3) continue;
        bf_checks(NormalKnownVariance(0.5 + u(rng), 1 + static_cast<long>(20 * u(rng)), -1.0 + 2.0 * u(rng)), pair,
                  decompose(pr, pair));
    }
    {
        HypothesisPair pair;
        pair.space = ParameterSpace(0.0, 1.0);
        pair.theta0 = IntervalUnion{Interval::closed(0.0, 0.5)};
        pair.theta1 = IntervalUnion{Interval::make(0.5, 1.0, false, true)};
        bf_checks(Binomial(10, 7), pair, decompose(Prior::beta(2, 3), pair));
    }

    // Scaling both loss constants leaves the minimizing action unchanged.
    const auto pair = unit_interval_pair();
    for (int i = 0; i < 200; ++i) {
        const auto s = analyze(NormalKnownVariance(1.0, 1 + static_cast<long>(30 * u(rng)), -2.0 + 4.0 * u(rng)),
                               Prior::normal(0.0, 0.5 + 2.0 * u(rng)), pair);
        const double k0 = 0.05 + 10.0 * u(rng), k1 = 0.05 + 10.0 * u(rng);
        Outcome ref = Outcome::Indifferent;
        bool first = true;
        for (double scale : {0.01, 1.0, 100.0}) {
            const auto [r0, r1] = expected_posterior_loss_simplified(SimplifiedLoss(scale * k0, scale * k1), s.p0_post, s.p1_post);
            const Outcome a = argmin_action(r0, r1);
            const Outcome p = optimal_action_precise(SimplifiedLoss(scale * k0, scale * k1).ratio(),
                                                     OddsValue::from_probabilities(s.p0_post, s.p1_post));
            if (first) ref = a;
            if (a != ref || p != ref) ++argmin_changes;
            first = false;
        }
    }
    c.require(p0_dev <= 1e-12, "BF moved with p0");
    c.require(swap_dev <= 1e-12, "swapped BF is not the reciprocal");
    c.require(argmin_changes == 0, "argmin changed under loss scaling");
    c.detail << "scenarios=" << scenarios << " p0 max rel dev=" << p0_dev << " swap max rel dev=" << swap_dev
             << " argmin changes=" << argmin_changes << "/600";
}

// Step loss through quadrature of the posterior against the two-number formula.
void general_vs_simplified(Check& c) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    int mismatched_actions = 0;
    for (int i = 0; i < 20; ++i) {
        SamplingModel m;
        Prior prior;
        HypothesisPair pair;
        if (i % 4 == 3) {
            const double cut = 0.2 + 0.6 * u(rng);
            pair.space = ParameterSpace(0.0, 1.0);
            pair.theta0 = IntervalUnion{Interval::closed(0.0, cut)};
            pair.theta1 = IntervalUnion{Interval::make(cut, 1.0, false, true)};
            const long n = 5 + static_cast<long>(40 * u(rng));
            m = Binomial(n, static_cast<long>(u(rng) * n));
            prior = Prior::beta(0.5 + 3.0 * u(rng), 0.5 + 3.0 * u(rng));
        } else {
            double a = -1.5 + 3.0 * u(rng), b = -1.5 + 3.0 * u(rng);
            if (a > b) std::swap(a, b);
            pair = HypothesisPair::interval_vs_complement(a, b);
            m = NormalKnownVariance(0.5 + u(rng), 1 + static_cast<long>(25 * u(rng)), -1.0 + 2.0 * u(rng));
            prior = i % 2 ? Prior::flat(0.2 + u(rng)) : Prior::normal(-1.0 + 2.0 * u(rng), 0.3 + 2.0 * u(rng));
        }
        const auto s = analyze(m, prior, pair);
        const SimplifiedLoss loss(0.1 + 5.0 * u(rng), 0.1 + 5.0 * u(rng));
        const auto [g0, g1] = expected_posterior_loss_general(step_loss_grid(pair, loss), s.posterior);
        const auto [r0, r1] = expected_posterior_loss_simplified(loss, s.p0_post, s.p1_post);
        worst = std::max({worst, std::abs(g0 - r0), std::abs(g1 - r1)});
        if (argmin_action(g0, g1) != argmin_action(r0, r1)) ++mismatched_actions;
    }
    c.require(worst < 1e-6, "expected losses differ by more than 1e-6");
    c.require(mismatched_actions == 0, "minimizing action differs");
    c.detail << "posteriors=20 max abs diff=" << worst << " action mismatches=" << mismatched_actions;
}

void workflow_suite(Check& c) {
    using namespace workflow;
    const json actions = {{"a0", "keep the current treatment"}, {"a1", "switch treatment"}};
    auto build = [&](double kl, double ku, const std::string& upto) {
        AnalysisDocument d = create_analysis(Guide::Full, "acceptance");
        const std::vector<std::pair<std::string, json>> steps{
            {"1", actions},
            {"2", {{"family", "normal_known_variance"}, {"sigma2", 1}}},
            {"3", {{"prior", {{"kind", "improper_flat"}, {"c", 0.2}}}}},
            {"4", {{"acknowledged", true}}},
            {"5", {{"interval", {-1, 1}}}},
            {"6", {{"typeI", "switch without benefit"}, {"typeII", "keep although switching helps"}}},
            {"7", {{"kLower", kl}, {"kUpper", ku}}},
            {"8", {{"n", 10}, {"mean", 0.5}}},
            {"9", json::object()},
            {"10", json::object()},
        };
        for (const auto& [sid, p] : steps) {
            submit_step(d, sid, p, "r" + sid);
            if (sid == upto) break;
        }
        return d;
    };
    int checks = 0;
    auto expect_throw = [&](auto&& f, const std::string& code, const std::string& what) {
        ++checks;
        try {
            f();
            c.require(false, what + " did not fail");
        } catch (const Error& e) {
            c.require(e.code() == code, what + " failed with " + e.code() + " instead of " + code);
        }
    };

    // dependency ordering
    {
        auto d = create_analysis(Guide::Full, "order");
        expect_throw([&] { submit_step(d, "5", {{"interval", {-1, 1}}}); }, "dependency_error", "hypotheses before model");
        auto e = build(0.5, 2, "8");
        expect_throw([&] { submit_step(e, "10", json::object()); }, "dependency_error", "decision before posterior");
    }
    // lock discipline
    {
        auto d = build(0.5, 2, "8");
        const auto before = d;
        for (const char* sid : {"1", "2", "3", "4", "5", "6", "7"})
            expect_throw([&] { submit_step(d, sid, d.step(sid).payload); }, "locked", std::string("edit of step ") + sid);
        ++checks;
        c.require(d == before, "rejected edits changed the document");
        c.require(d.pre_data_hash && d.pre_data_hash->size() == 64, "no pre-data hash recorded");
    }
    // persistence and deterministic reports
    {
        const auto d = build(0.5, 2, "10");
        ++checks;
        c.require(document_from_json(to_json(d)) == d, "JSON round trip changed the document");
        const auto dir = std::filesystem::temp_directory_path() / "bfdecide_acceptance_store";
        std::filesystem::remove_all(dir);
        DocumentStore store(dir);
        store.save(d, 0);
        c.require(store.load(d.id) == d, "store round trip changed the document");
        std::filesystem::remove_all(dir);
        ++checks;
        c.require(render_report(d) == render_report(deserialize(serialize(d))), "report is not deterministic");
        c.require(d.step("10").derived.at("outcome").at("outcome") == "choose_a0", "decision differs from choose_a0");
        const auto w = build(0.02, 0.5, "10");
        ++checks;
        c.require(render_report(w).find("a decision was withheld at first") != std::string::npos, "withheld disclosure missing");
    }
    // Bayes-factor guide with mismatched hypothesis pairs
    {
        auto d = create_analysis(Guide::FromBayesFactor, "bf-guide");
        submit_step(d, "A", {{"parameterRelevant", true}});
        submit_step(d, "B", {{"actions", actions}, {"decisionPair", {{"interval", {-1, 1}}}}, {"bfPair", {{"interval", {-0.5, 0.5}}}}});
        submit_step(d, "C", {{"withinPriorsMatch", true}});
        submit_step(d, "D", {{"p0", 0.6}}, "prior odds from earlier trials");
        submit_step(d, "E", {{"acknowledged", true}, {"typeI", "t1"}, {"typeII", "t2"}, {"kLower", 1}, {"kUpper", 1}});
        submit_step(d, "F", {{"bf", 2.5}});
        const auto app = applicability_checks(d);
        ++checks;
        c.require(!app.pass, "applicability passed for mismatched pairs");
        c.require(app.recommendation.find("restart the decision theoretic account") != std::string::npos,
                  "restart advice missing");
        expect_throw([&] { run_decision(d); }, "applicability_failed", "decision with failed applicability");
    }
    c.detail << "checks=" << checks;
}

} // namespace

int main() {
    run("flat-prior-normal-scenario", flat_prior_scenario);
    run("normal-prior-decomposition", normal_prior_decomposition);
    run("bf-times-prior-odds-consistency", bf_prior_odds_consistency);
    run("robust-rule-scan-equivalence", robust_rule_equivalence);
    run("invariance-suite", invariance_suite);
    run("general-vs-simplified-loss", general_vs_simplified);
    run("workflow-suite", workflow_suite);
    std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
