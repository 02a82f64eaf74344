#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pmiris {

enum class Eye { left, right };
enum class Gender { male, female, unknown };
enum class PairLabel { genuine, impostor };

std::string to_string(Eye e);
std::string to_string(Gender g);
std::string to_string(PairLabel l);
/// Accepts left/right and the aliases l, r, os, od (case-insensitive).
Eye parse_eye(const std::string& text);
/// Accepts male/female/unknown and m, f, u (case-insensitive).
Gender parse_gender(const std::string& text);
PairLabel parse_label(const std::string& text);

struct SampleMetadata {
    std::string sample_id;
    std::string subject_id;
    Eye eye = Eye::left;
    int session = 1;
    double pmi_hours = 0;
    int age_years = 0;
    Gender gender = Gender::unknown;
    std::string image_path;

    bool same_class(const SampleMetadata& other) const {
        return subject_id == other.subject_id && eye == other.eye;
    }
    friend bool operator==(const SampleMetadata&, const SampleMetadata&) = default;
};

inline constexpr const char* kMetadataHeader =
    "sample_id,subject_id,eye,session,pmi_hours,age_years,gender,image_path";

std::vector<SampleMetadata> parse_metadata_csv(std::istream& in);
std::vector<SampleMetadata> load_metadata_csv(const std::filesystem::path& path);
void write_metadata_csv(std::ostream& out, const std::vector<SampleMetadata>& rows);

/// Returns 1, 2 or 3 for ages 1-33, 34-66, 67-99; nullopt outside 1..99.
std::optional<int> age_group_of(int age_years);

/// One probe/gallery pairing. score is absent iff ftm.
struct ComparisonRecord {
    std::string probe_id;
    std::string gallery_id;
    PairLabel label = PairLabel::impostor;
    std::optional<double> score;
    int best_shift = 0;
    bool ftm = false;
    double pmi_max_hours = 0;
    std::string gender;     // shared gender, or "mixed"
    std::string age_group;  // "1".."3", "mixed" or "excluded"

    friend bool operator==(const ComparisonRecord&, const ComparisonRecord&) = default;
};

ComparisonRecord make_record(const SampleMetadata& probe, const SampleMetadata& gallery);

inline constexpr const char* kScoreHeader =
    "probe_id,gallery_id,label,score,best_shift,ftm,pmi_max_hours,gender,age_group";

void write_score_csv(std::ostream& out, const std::vector<ComparisonRecord>& records);
std::vector<ComparisonRecord> parse_score_csv(std::istream& in);
std::vector<ComparisonRecord> load_score_csv(const std::filesystem::path& path);

std::vector<std::string> split_csv_line(const std::string& line);
std::string format_real(double v);

}  // namespace pmiris
