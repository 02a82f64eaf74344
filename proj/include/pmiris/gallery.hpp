#pragma once

#include "pmiris/matching.hpp"
#include "pmiris/metadata.hpp"
#include "pmiris/types.hpp"

#include <filesystem>
#include <map>
#include <shared_mutex>
#include <string>
#include <vector>

namespace pmiris {

struct GalleryEntry {
    SampleMetadata meta;
    EncoderId encoder = EncoderId::gabor2d;
    std::uint64_t params_digest = 0;
};

struct Candidate {
    std::string sample_id;
    double score = 1.0;
    int best_shift = 0;  // template columns
    SampleMetadata meta;
};

struct IdentifyResult {
    std::vector<Candidate> candidates;
    std::size_t skipped_incompatible = 0;
    std::size_t skipped_overlap = 0;
};

/// Directory-backed template store:
///   <root>/index.json
///   <root>/templates/<sample_id>.pmit
/// The index is rewritten through a temporary file and a rename. Readers run
/// concurrently, writers are serialized.
class Gallery {
public:
    explicit Gallery(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    /// Throws DuplicateSampleId, InvalidArgument (bad sample id) or StorageFailure.
    std::string enroll(const IrisTemplate& t, const SampleMetadata& meta);
    bool remove(const std::string& sample_id);
    std::vector<GalleryEntry> list() const;
    std::size_t size() const;

    /// Ascending score, ties by sample_id, at most k entries.
    IdentifyResult identify(const IrisTemplate& probe, std::size_t k, int max_shift,
                            double overlap_floor = kDefaultOverlapFloor) const;

private:
    void write_index_locked() const;

    std::filesystem::path root_;
    mutable std::shared_mutex mu_;
    std::map<std::string, GalleryEntry> entries_;
    std::map<std::string, IrisTemplate> templates_;
};

/// Sample ids are used as file names: [A-Za-z0-9._-]+, not starting with '.'.
bool valid_sample_id(const std::string& id);

}  // namespace pmiris
