#include "pmiris/gallery.hpp"

#include "pmiris/error.hpp"
#include "pmiris/hash.hpp"
#include "pmiris/json_io.hpp"
#include "pmiris/template_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <mutex>

namespace fs = std::filesystem;

namespace pmiris {

bool valid_sample_id(const std::string& id) {
    if (id.empty() || id.size() > 200 || id.front() == '.') return false;
    return std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '.' || c == '_' || c == '-';
    });
}

namespace {

fs::path template_path(const fs::path& root, const std::string& id) { return root / "templates" / (id + ".pmit"); }

}  // namespace

Gallery::Gallery(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_ / "templates", ec);
    if (ec) throw Error(ErrorCode::StorageFailure, "cannot create gallery at " + root_.string() + ": " + ec.message());

    const fs::path index = root_ / "index.json";
    if (!fs::exists(index)) {
        write_index_locked();
        return;
    }
    Json j;
    try {
        std::ifstream in(index);
        j = Json::parse(in);
    } catch (const std::exception& e) {
        throw Error(ErrorCode::StorageFailure, "unreadable gallery index: " + std::string(e.what()));
    }
    for (const auto& e : j.at("entries")) {
        GalleryEntry entry;
        entry.meta = metadata_from_json(e.at("metadata"));
        entry.encoder = parse_encoder_id(e.at("encoder").get<std::string>());
        entry.params_digest = std::stoull(e.at("params_digest").get<std::string>(), nullptr, 16);
        const auto& id = entry.meta.sample_id;
        try {
            templates_.emplace(id, load_template(template_path(root_, id)));
        } catch (const Error& err) {
            throw Error(ErrorCode::StorageFailure, "gallery template for '" + id + "': " + err.what());
        }
        entries_.emplace(id, std::move(entry));
    }
}

void Gallery::write_index_locked() const {
    Json entries = Json::array();
    for (const auto& [id, e] : entries_) {
        entries.push_back(Json{{"sample_id", id},
                               {"encoder", to_string(e.encoder)},
                               {"params_digest", to_hex(e.params_digest)},
                               {"file", "templates/" + id + ".pmit"},
                               {"metadata", to_json(e.meta)}});
    }
    const Json j{{"version", 1}, {"entries", entries}};
    const fs::path tmp = root_ / "index.json.tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << j.dump(2) << '\n';
        if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, root_ / "index.json", ec);
    if (ec) throw Error(ErrorCode::StorageFailure, "cannot replace gallery index: " + ec.message());
}

std::string Gallery::enroll(const IrisTemplate& t, const SampleMetadata& meta) {
    t.validate();
    if (!valid_sample_id(meta.sample_id)) {
        throw Error(ErrorCode::InvalidArgument, "sample id '" + meta.sample_id + "' is not usable as a file name");
    }
    std::unique_lock lock(mu_);
    if (entries_.count(meta.sample_id)) {
        throw Error(ErrorCode::DuplicateSampleId, "sample '" + meta.sample_id + "' already enrolled");
    }
    try {
        save_template(template_path(root_, meta.sample_id), t);
    } catch (const Error& e) {
        throw Error(ErrorCode::StorageFailure, e.what());
    }
    entries_.emplace(meta.sample_id, GalleryEntry{meta, t.encoder_id, t.params_digest});
    templates_.emplace(meta.sample_id, t);
    try {
        write_index_locked();
    } catch (...) {
        entries_.erase(meta.sample_id);
        templates_.erase(meta.sample_id);
        throw;
    }
    return meta.sample_id;
}

bool Gallery::remove(const std::string& sample_id) {
    std::unique_lock lock(mu_);
    auto it = entries_.find(sample_id);
    if (it == entries_.end()) return false;
    GalleryEntry saved = std::move(it->second);
    entries_.erase(it);
    try {
        write_index_locked();
    } catch (...) {
        entries_.emplace(sample_id, std::move(saved));
        throw;
    }
    templates_.erase(sample_id);
    std::error_code ec;
    fs::remove(template_path(root_, sample_id), ec);
    return true;
}

std::vector<GalleryEntry> Gallery::list() const {
    std::shared_lock lock(mu_);
    std::vector<GalleryEntry> out;
    out.reserve(entries_.size());
    for (const auto& [id, e] : entries_) out.push_back(e);
    return out;
}

std::size_t Gallery::size() const {
    std::shared_lock lock(mu_);
    return entries_.size();
}

IdentifyResult Gallery::identify(const IrisTemplate& probe, std::size_t k, int max_shift,
                                 double overlap_floor) const {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    std::shared_lock lock(mu_);
    IdentifyResult res;
    for (const auto& [id, t] : templates_) {
        if (!compatible(probe, t)) {
            ++res.skipped_incompatible;
            continue;
        }
        try {
            const auto m = fractional_hamming(probe, t, max_shift, overlap_floor);
            res.candidates.push_back(Candidate{id, m.score, m.best_shift, entries_.at(id).meta});
        } catch (const Error& e) {
            if (e.code() != ErrorCode::InsufficientOverlap) throw;
            ++res.skipped_overlap;
        }
    }
    std::sort(res.candidates.begin(), res.candidates.end(), [](const Candidate& a, const Candidate& b) {
        return a.score != b.score ? a.score < b.score : a.sample_id < b.sample_id;
    });
    if (res.candidates.size() > k) res.candidates.resize(k);
    return res;
}

}  // namespace pmiris
