// bfdecide: decisions from hypothesis-based losses on the command line.
//
//   bfdecide decide   spec.json            outcome JSON; exit 0 a0/a1, 10 withheld, 11 indifferent
//   bfdecide bf       spec.json            Bayes factor of H0 over H1
//   bfdecide sweep    spec.json --grid lo:hi:n:log
//   bfdecide plotdata spec.json --figure loss|prior-decomposition|improper-prior
//
// Analysis documents kept in a single file:
//   bfdecide doc new    doc.json --guide full|from_bayes_factor [--id name]
//   bfdecide doc step   doc.json STEP payload.json [--rationale text]
//   bfdecide doc lock   doc.json
//   bfdecide doc decide doc.json
//   bfdecide doc report doc.json [--format markdown|json]

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "bfdecide/bfdecide.hpp"

namespace {

using bfd::io::json;

constexpr int kExitError = 1;
constexpr int kExitWithheld = 10;
constexpr int kExitIndifferent = 11;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw bfd::NotFoundError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_spec(const std::string& path) {
    json j = bfd::io::parse(read_file(path), path);
    if (!j.is_object()) throw bfd::ValidationError(path + ": spec must be a JSON object");
    return j;
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw bfd::Error("io_error", "cannot write " + out);
    f << text;
}

int exit_code(bfd::Outcome o) {
    switch (o) {
        case bfd::Outcome::ChooseA0:
        case bfd::Outcome::ChooseA1: return 0;
        case bfd::Outcome::Withheld: return kExitWithheld;
        case bfd::Outcome::Indifferent: return kExitIndifferent;
    }
    return kExitError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decisions from hypothesis-based losses and Bayes factors"};
    app.require_subcommand(1);

    std::string spec_path, grid, figure, out, doc_path, step_id, payload_path, rationale, guide = "full", doc_id,
        format = "markdown";

    auto* decide = app.add_subcommand("decide", "Optimal action for a spec file");
    decide->add_option("spec", spec_path, "Spec JSON file")->required();
    decide->add_option("--out", out, "Write output to this path");

    auto* bf = app.add_subcommand("bf", "Bayes factor of H0 over H1");
    bf->add_option("spec", spec_path, "Spec JSON file")->required();
    bf->add_option("--out", out, "Write output to this path");

    auto* sweep = app.add_subcommand("sweep", "Outcomes over a grid of k (or posterior odds)");
    sweep->add_option("spec", spec_path, "Spec JSON file")->required();
    sweep->add_option("--grid", grid, "lo:hi:n[:log]");
    sweep->add_option("--out", out, "Write output to this path");

    auto* plotdata = app.add_subcommand("plotdata", "TSV series for a figure");
    plotdata->add_option("spec", spec_path, "Spec JSON file")->required();
    plotdata->add_option("--figure", figure, "loss, prior-decomposition or improper-prior")->required();
    plotdata->add_option("--out", out, "Write output to this path");

    auto* doc = app.add_subcommand("doc", "Analysis documents in a single file");
    doc->require_subcommand(1);
    auto* doc_new = doc->add_subcommand("new", "Create a document");
    doc_new->add_option("file", doc_path)->required();
    doc_new->add_option("--guide", guide, "full or from_bayes_factor");
    doc_new->add_option("--id", doc_id, "Document id (defaults to the file stem)");
    auto* doc_step = doc->add_subcommand("step", "Submit one step");
    doc_step->add_option("file", doc_path)->required();
    doc_step->add_option("step", step_id)->required();
    doc_step->add_option("payload", payload_path, "Payload JSON file")->required();
    doc_step->add_option("--rationale", rationale);
    auto* doc_lock = doc->add_subcommand("lock", "Freeze the pre-data steps");
    doc_lock->add_option("file", doc_path)->required();
    auto* doc_decide = doc->add_subcommand("decide", "Run the decision step");
    doc_decide->add_option("file", doc_path)->required();
    auto* doc_report = doc->add_subcommand("report", "Render the report");
    doc_report->add_option("file", doc_path)->required();
    doc_report->add_option("--format", format, "markdown or json");
    doc_report->add_option("--out", out, "Write output to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitError;
    }

    try {
        if (*decide) {
            const auto d = bfd::compute::decide(read_spec(spec_path));
            emit(bfd::io::to_json(d).dump(2) + "\n", out);
            return exit_code(d.outcome);
        }
        if (*bf) {
            emit(bfd::compute::bayes_factor(read_spec(spec_path)).dump(2) + "\n", out);
            return 0;
        }
        if (*sweep) {
            json spec = read_spec(spec_path);
            if (!grid.empty()) spec["grid"] = grid;
            const std::string what = bfd::io::has(spec, "sweep") ? spec.at("sweep").get<std::string>() : "k";
            emit(bfd::compute::sweep_tsv(bfd::compute::sweep(spec), what), out);
            return 0;
        }
        if (*plotdata) {
            emit(bfd::plot::figure(figure, read_spec(spec_path)), out);
            return 0;
        }
        if (*doc_new) {
            if (std::filesystem::exists(doc_path)) throw bfd::VersionConflict(doc_path + " already exists");
            const std::string id = doc_id.empty() ? std::filesystem::path(doc_path).stem().string() : doc_id;
            bfd::save_file(doc_path, bfd::workflow::create_analysis(guide, id));
            return 0;
        }
        if (*doc_step) {
            auto d = bfd::load_file(doc_path);
            bfd::workflow::submit_step(d, step_id, bfd::io::parse(read_file(payload_path), payload_path), rationale);
            bfd::save_file(doc_path, d);
            return 0;
        }
        if (*doc_lock) {
            auto d = bfd::load_file(doc_path);
            bfd::workflow::lock(d);
            bfd::save_file(doc_path, d);
            std::cout << *d.pre_data_hash << "\n";
            return 0;
        }
        if (*doc_decide) {
            auto d = bfd::load_file(doc_path);
            const auto o = bfd::workflow::run_decision(d);
            bfd::save_file(doc_path, d);
            std::cout << bfd::io::to_json(o).dump(2) << "\n";
            return exit_code(o.outcome);
        }
        if (*doc_report) {
            emit(bfd::workflow::render_report(bfd::load_file(doc_path), format), out);
            return 0;
        }
    } catch (const bfd::Error& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
