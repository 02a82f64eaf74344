#include "pmiris/metadata.hpp"

#include "pmiris/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace pmiris {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

double parse_double(const std::string& text, std::size_t row, const char* field) {
    double v = 0;
    const auto t = trim(text);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
        throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(row) + ": bad " + field + " '" + text + "'");
    }
    return v;
}

int parse_int(const std::string& text, std::size_t row, const char* field) {
    int v = 0;
    const auto t = trim(text);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
        throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(row) + ": bad " + field + " '" + text + "'");
    }
    return v;
}

std::vector<std::string> read_header(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::SchemaMismatch, "missing header row");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
    auto cols = split_csv_line(line);
    for (auto& c : cols) c = trim(c);
    return cols;
}

void expect_header(const std::vector<std::string>& got, const std::string& expected) {
    auto want = split_csv_line(expected);
    if (got != want) throw Error(ErrorCode::SchemaMismatch, "header must be '" + expected + "'");
}

}  // namespace

std::string to_string(Eye e) { return e == Eye::left ? "left" : "right"; }

std::string to_string(Gender g) {
    switch (g) {
        case Gender::male: return "male";
        case Gender::female: return "female";
        case Gender::unknown: return "unknown";
    }
    return "unknown";
}

std::string to_string(PairLabel l) { return l == PairLabel::genuine ? "genuine" : "impostor"; }

Eye parse_eye(const std::string& text) {
    const auto t = lower(trim(text));
    if (t == "left" || t == "l" || t == "os") return Eye::left;
    if (t == "right" || t == "r" || t == "od") return Eye::right;
    throw Error(ErrorCode::SchemaMismatch, "unknown eye value '" + text + "'");
}

Gender parse_gender(const std::string& text) {
    const auto t = lower(trim(text));
    if (t == "male" || t == "m") return Gender::male;
    if (t == "female" || t == "f") return Gender::female;
    if (t == "unknown" || t == "u") return Gender::unknown;
    throw Error(ErrorCode::SchemaMismatch, "unknown gender value '" + text + "'");
}

PairLabel parse_label(const std::string& text) {
    const auto t = lower(trim(text));
    if (t == "genuine") return PairLabel::genuine;
    if (t == "impostor") return PairLabel::impostor;
    throw Error(ErrorCode::SchemaMismatch, "unknown label '" + text + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::string format_real(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), ptr};
}

std::vector<SampleMetadata> parse_metadata_csv(std::istream& in) {
    expect_header(read_header(in), kMetadataHeader);
    std::vector<SampleMetadata> rows;
    std::string line;
    std::size_t row = 2;  // file line number; the header is line 1
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 8) {
            throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(row) + ": expected 8 fields");
        }
        for (int idx : {0, 1, 2, 4, 5, 6}) {
            if (trim(f[static_cast<std::size_t>(idx)]).empty()) {
                throw Error(ErrorCode::MissingField, "row " + std::to_string(row));
            }
        }
        SampleMetadata m;
        m.sample_id = trim(f[0]);
        m.subject_id = trim(f[1]);
        m.eye = parse_eye(f[2]);
        m.session = trim(f[3]).empty() ? 1 : parse_int(f[3], row, "session");
        m.pmi_hours = parse_double(f[4], row, "pmi_hours");
        m.age_years = parse_int(f[5], row, "age_years");
        m.gender = parse_gender(f[6]);
        m.image_path = trim(f[7]);
        if (m.pmi_hours < 0) throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(row) + ": negative pmi_hours");
        if (m.age_years < 0 || m.age_years > 130) {
            throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(row) + ": age out of [0,130]");
        }
        if (m.session < 1) throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(row) + ": session < 1");
        rows.push_back(std::move(m));
        ++row;
    }
    return rows;
}

std::vector<SampleMetadata> load_metadata_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return parse_metadata_csv(in);
}

void write_metadata_csv(std::ostream& out, const std::vector<SampleMetadata>& rows) {
    out << kMetadataHeader << '\n';
    for (const auto& m : rows) {
        out << quote_if_needed(m.sample_id) << ',' << quote_if_needed(m.subject_id) << ',' << to_string(m.eye) << ','
            << m.session << ',' << format_real(m.pmi_hours) << ',' << m.age_years << ',' << to_string(m.gender) << ','
            << quote_if_needed(m.image_path) << '\n';
    }
}

std::optional<int> age_group_of(int age_years) {
    if (age_years >= 1 && age_years <= 33) return 1;
    if (age_years >= 34 && age_years <= 66) return 2;
    if (age_years >= 67 && age_years <= 99) return 3;
    return std::nullopt;
}

ComparisonRecord make_record(const SampleMetadata& probe, const SampleMetadata& gallery) {
    ComparisonRecord rec;
    rec.probe_id = probe.sample_id;
    rec.gallery_id = gallery.sample_id;
    rec.label = probe.same_class(gallery) ? PairLabel::genuine : PairLabel::impostor;
    rec.pmi_max_hours = std::max(probe.pmi_hours, gallery.pmi_hours);
    rec.gender = probe.gender == gallery.gender ? to_string(probe.gender) : "mixed";
    const auto ga = age_group_of(probe.age_years);
    const auto gb = age_group_of(gallery.age_years);
    if (!ga || !gb) {
        rec.age_group = "excluded";
    } else if (*ga != *gb) {
        rec.age_group = "mixed";
    } else {
        rec.age_group = std::to_string(*ga);
    }
    return rec;
}

void write_score_csv(std::ostream& out, const std::vector<ComparisonRecord>& records) {
    out << kScoreHeader << '\n';
    for (const auto& r : records) {
        out << quote_if_needed(r.probe_id) << ',' << quote_if_needed(r.gallery_id) << ',' << to_string(r.label) << ','
            << (r.score ? format_real(*r.score) : std::string()) << ',' << r.best_shift << ',' << (r.ftm ? 1 : 0)
            << ',' << format_real(r.pmi_max_hours) << ',' << quote_if_needed(r.gender) << ','
            << quote_if_needed(r.age_group) << '\n';
    }
}

std::vector<ComparisonRecord> parse_score_csv(std::istream& in) {
    expect_header(read_header(in), kScoreHeader);
    std::vector<ComparisonRecord> out;
    std::string line;
    std::size_t row = 2;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 9) throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(row) + ": expected 9 fields");
        ComparisonRecord r;
        r.probe_id = f[0];
        r.gallery_id = f[1];
        r.label = parse_label(f[2]);
        const auto ftm = trim(f[5]);
        if (ftm != "0" && ftm != "1") throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(row) + ": ftm must be 0/1");
        r.ftm = ftm == "1";
        if (!trim(f[3]).empty()) r.score = parse_double(f[3], row, "score");
        if (r.ftm == r.score.has_value()) {
            throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(row) + ": score must be present iff ftm=0");
        }
        r.best_shift = parse_int(f[4], row, "best_shift");
        r.pmi_max_hours = parse_double(f[6], row, "pmi_max_hours");
        r.gender = f[7];
        r.age_group = f[8];
        out.push_back(std::move(r));
        ++row;
    }
    return out;
}

std::vector<ComparisonRecord> load_score_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return parse_score_csv(in);
}

}  // namespace pmiris
