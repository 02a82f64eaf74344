#include "pmiris/json_io.hpp"

#include "pmiris/error.hpp"

#include <cmath>

namespace pmiris {

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

// JSON has no infinity; unbounded values are written as null.
Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

template <class T>
T require(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw Error(ErrorCode::MissingField, std::string("missing field '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaMismatch, std::string("field '") + key + "': " + e.what());
    }
}

}  // namespace

Json to_json(const Circle& c) { return Json{{"cx", c.cx}, {"cy", c.cy}, {"r", c.r}}; }

Circle circle_from_json(const Json& j) {
    return Circle{require<double>(j, "cx"), require<double>(j, "cy"), require<double>(j, "r")};
}

Json segmentation_json(const Segmentation& seg, const std::optional<std::string>& mask_path) {
    Json j{{"pupil", to_json(seg.pupil)}, {"iris", to_json(seg.iris)}};
    if (mask_path) j["mask_path"] = *mask_path;
    return j;
}

Segmentation segmentation_from_json(const Json& j, std::optional<std::string>* mask_path) {
    Segmentation seg;
    seg.pupil = circle_from_json(require<Json>(j, "pupil"));
    seg.iris = circle_from_json(require<Json>(j, "iris"));
    if (mask_path) {
        *mask_path = std::nullopt;
        if (j.contains("mask_path") && !j["mask_path"].is_null()) *mask_path = require<std::string>(j, "mask_path");
    }
    seg.validate();
    return seg;
}

Json to_json(const SampleMetadata& m) {
    return Json{{"sample_id", m.sample_id}, {"subject_id", m.subject_id}, {"eye", to_string(m.eye)},
                {"session", m.session},     {"pmi_hours", m.pmi_hours},   {"age_years", m.age_years},
                {"gender", to_string(m.gender)}, {"image_path", m.image_path}};
}

SampleMetadata metadata_from_json(const Json& j) {
    SampleMetadata m;
    m.sample_id = require<std::string>(j, "sample_id");
    m.subject_id = require<std::string>(j, "subject_id");
    m.eye = parse_eye(require<std::string>(j, "eye"));
    m.session = j.contains("session") ? require<int>(j, "session") : 1;
    m.pmi_hours = require<double>(j, "pmi_hours");
    m.age_years = require<int>(j, "age_years");
    m.gender = parse_gender(require<std::string>(j, "gender"));
    if (j.contains("image_path")) m.image_path = require<std::string>(j, "image_path");
    return m;
}

Json to_json(const QualityRecord& q) {
    Json j = Json::object();
    for (auto metric : kAllQualityMetrics) j[metric_key(metric)] = opt(metric_value(q, metric));
    return j;
}

Json pair_outcome_json(EncoderId encoder, const PairOutcome& o) {
    Json j{{"encoder", to_string(encoder)}};
    j["score"] = o.match ? Json(o.match->score) : Json(nullptr);
    j["best_shift"] = o.best_shift_polar;
    j["ftm"] = o.ftm;
    j["overlap_bits"] = o.match ? Json(o.match->overlap_bits) : Json(nullptr);
    j["error_code"] = o.failure ? Json(to_string(o.failure->code)) : Json(nullptr);
    return j;
}

Json to_json(const Histogram& h) {
    return Json{{"lo", h.lo}, {"hi", h.hi}, {"bins", h.genuine.size()}, {"genuine", h.genuine}, {"impostor", h.impostor}};
}

Json to_json(const EvaluationSummary& s) {
    return Json{{"d_prime", opt(s.d_prime)},       {"eer", opt(s.eer)},
                {"auc", opt(s.auc)},               {"ftm_rate", s.ftm_rate},
                {"n_genuine", s.n_genuine},        {"n_impostor", s.n_impostor},
                {"n_ftm", s.n_ftm},                {"histogram", to_json(s.histogram)}};
}

Json to_json(const PadSummary& s) {
    Json levels = Json::array();
    for (const auto& l : s.levels) {
        levels.push_back(Json{{"apcer", l.apcer},
                              {"true_detection_rate", l.true_detection_rate},
                              {"bpcer", 1.0 - l.true_detection_rate},
                              {"threshold", finite_or_null(l.threshold)},
                              {"below_resolution", l.below_resolution}});
    }
    Json at = Json::object();
    for (const auto& l : s.levels) at[format_real(l.apcer)] = l.true_detection_rate;
    return Json{{"auc", s.auc}, {"bpcer_at_apcer", at}, {"levels", levels}, {"histogram", to_json(s.histogram)}};
}

Json to_json(const TestResult& t) {
    return Json{{"statistic", finite_or_null(t.statistic)},
                {"statistic_infinite", std::isinf(t.statistic)},
                {"p_value", t.p_value},
                {"df1", t.df1},
                {"df2", t.df2},
                {"p_underflow", t.p_underflow},
                {"degenerate", t.degenerate}};
}

Json to_json(const BalanceResult& b) {
    Json groups = Json::object();
    for (const auto& [label, members] : b.groups) {
        Json ids = Json::array();
        for (const auto& m : members) ids.push_back(m.sample_id);
        groups[label] = Json{{"n", members.size()}, {"mean_pmi_hours", mean_pmi(members)}, {"sample_ids", ids}};
    }
    Json removed = Json::array();
    for (const auto& [label, id] : b.removed) removed.push_back(Json{{"group", label}, {"sample_id", id}});
    return Json{{"groups", groups}, {"removed", removed}};
}

Json to_json(const DensityGrid& g) {
    return Json{{"nx", g.nx},       {"ny", g.ny},       {"x_min", g.x_min}, {"x_max", g.x_max},
                {"y_min", g.y_min}, {"y_max", g.y_max}, {"density", g.density}};
}

Json to_json(const Heatmap& h) {
    Json grid = Json::array();
    for (int r = 0; r < h.rows; ++r) {
        Json row = Json::array();
        for (int c = 0; c < h.cols; ++c) row.push_back(h.present.at(r, c) ? Json(h.at(r, c)) : Json(nullptr));
        grid.push_back(std::move(row));
    }
    return Json{{"rows", h.rows}, {"cols", h.cols}, {"window", kHeatmapWindow}, {"values", grid}};
}

Json identify_json(const IdentifyResult& res, int angular_stride) {
    Json cands = Json::array();
    for (std::size_t i = 0; i < res.candidates.size(); ++i) {
        const auto& c = res.candidates[i];
        cands.push_back(Json{{"rank", i + 1},
                             {"sample_id", c.sample_id},
                             {"score", c.score},
                             {"best_shift", c.best_shift * angular_stride},
                             {"metadata", to_json(c.meta)}});
    }
    return Json{{"ftm", false},
                {"error_code", nullptr},
                {"candidates", cands},
                {"skipped_incompatible", res.skipped_incompatible},
                {"skipped_overlap", res.skipped_overlap}};
}

}  // namespace pmiris
