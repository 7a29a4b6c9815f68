#pragma once

// File-backed persistence for analysis documents.
//
// DocumentStore keeps every version as objects/<sha256>.json and points
// refs/<id> at the latest one. save_file/load_file handle the single-file
// form used by the CLI.

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bfdecide/errors.hpp"
#include "bfdecide/hash.hpp"
#include "bfdecide/workflow.hpp"

namespace bfd {

namespace store_detail {

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw NotFoundError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_atomic(const std::filesystem::path& p, const std::string& text) {
    const auto tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("io_error", "cannot write " + tmp);
        out << text;
        if (!out.flush()) throw Error("io_error", "cannot write " + tmp);
    }
    std::filesystem::rename(tmp, p);
}

inline void check_id(const std::string& id) {
    if (id.empty() || id.size() > 128) throw ValidationError("document id must have 1 to 128 characters");
    for (char c : id)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'))
            throw ValidationError("document id may only contain letters, digits, '-' and '_'");
}

} // namespace store_detail

inline std::string serialize(const workflow::AnalysisDocument& doc) { return workflow::to_json(doc).dump(2) + "\n"; }

inline workflow::AnalysisDocument deserialize(const std::string& text) {
    return workflow::document_from_json(io::parse(text, "document"));
}

inline void save_file(const std::filesystem::path& path, const workflow::AnalysisDocument& doc) {
    store_detail::write_atomic(path, serialize(doc));
}

inline workflow::AnalysisDocument load_file(const std::filesystem::path& path) {
    return deserialize(store_detail::read_text(path));
}

class DocumentStore {
public:
    explicit DocumentStore(std::filesystem::path root) : root_(std::move(root)) {
        std::filesystem::create_directories(root_ / "objects");
        std::filesystem::create_directories(root_ / "refs");
    }

    const std::filesystem::path& root() const noexcept { return root_; }

    bool exists(const std::string& id) const {
        store_detail::check_id(id);
        return std::filesystem::exists(root_ / "refs" / id);
    }

    workflow::AnalysisDocument load(const std::string& id) const {
        std::lock_guard lk(mu_);
        return load_unlocked(id);
    }

    // Stores `doc`. With `expected_version`, fails unless the stored version matches.
    // Returns the content hash of the stored object.
    std::string save(const workflow::AnalysisDocument& doc, std::optional<long> expected_version = std::nullopt) {
        store_detail::check_id(doc.id);
        std::lock_guard lk(mu_);
        if (expected_version) {
            const long cur = exists(doc.id) ? load_unlocked(doc.id).version : 0;
            if (cur != *expected_version)
                throw VersionConflict("document " + doc.id + " is at version " + std::to_string(cur) + ", not " +
                                      std::to_string(*expected_version));
        }
        const std::string text = serialize(doc);
        const std::string sha = sha256_hex(text);
        const auto obj = root_ / "objects" / (sha + ".json");
        if (!std::filesystem::exists(obj)) store_detail::write_atomic(obj, text);
        store_detail::write_atomic(root_ / "refs" / doc.id, sha + "\n");
        return sha;
    }

    std::vector<std::string> ids() const {
        std::vector<std::string> out;
        for (const auto& e : std::filesystem::directory_iterator(root_ / "refs"))
            if (e.is_regular_file() && e.path().extension() != ".tmp") out.push_back(e.path().filename().string());
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    workflow::AnalysisDocument load_unlocked(const std::string& id) const {
        store_detail::check_id(id);
        const auto ref = root_ / "refs" / id;
        if (!std::filesystem::exists(ref)) throw NotFoundError("no analysis with id '" + id + "'");
        std::string sha = store_detail::read_text(ref);
        while (!sha.empty() && (sha.back() == '\n' || sha.back() == '\r')) sha.pop_back();
        const std::string text = store_detail::read_text(root_ / "objects" / (sha + ".json"));
        if (sha256_hex(text) != sha) throw Error("corrupt_store", "object " + sha + " does not match its hash");
        return deserialize(text);
    }

    std::filesystem::path root_;
    mutable std::mutex mu_;
};

} // namespace bfd
