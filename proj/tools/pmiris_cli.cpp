#include "pmiris/error.hpp"
#include "pmiris/evaluation.hpp"
#include "pmiris/gallery.hpp"
#include "pmiris/hash.hpp"
#include "pmiris/json_io.hpp"
#include "pmiris/normalization.hpp"
#include "pmiris/pipeline.hpp"
#include "pmiris/quality.hpp"
#include "pmiris/service.hpp"
#include "pmiris/statistics.hpp"
#include "pmiris/template_io.hpp"
#include "pmiris/version.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace pmiris;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

// Thrown for flag combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void emit(const Json& j) { std::cout << j.dump(2) << '\n'; }

void log(const std::string& msg) { std::cerr << "pmiris: " << msg << '\n'; }

std::vector<EncoderId> parse_encoders(const std::vector<std::string>& names) {
    std::vector<EncoderId> out;
    for (const auto& n : names) {
        if (n == "all") return {EncoderId::gabor2d, EncoderId::loggabor1d, EncoderId::bif};
        out.push_back(parse_encoder_id(n));
    }
    if (out.empty()) out = {EncoderId::gabor2d, EncoderId::loggabor1d, EncoderId::bif};
    return out;
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i; (i = next++) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                    next = n;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (failure) std::rethrow_exception(failure);
}

bool is_template_file(const fs::path& p) { return p.extension() == ".pmit"; }

std::vector<double> read_score_column(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::vector<double> out;
    std::string line;
    int column = -1;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (column < 0) {
            const auto it = std::find(cells.begin(), cells.end(), "score");
            if (it != cells.end()) {
                column = static_cast<int>(it - cells.begin());
                continue;
            }
            column = static_cast<int>(cells.size()) - 1;
        }
        if (column >= static_cast<int>(cells.size())) {
            throw Error(ErrorCode::CorruptFile, path.string() + ":" + std::to_string(lineno) + ": missing score column");
        }
        try {
            std::size_t used = 0;
            const double v = std::stod(cells[column], &used);
            if (used != cells[column].size()) throw std::invalid_argument("trailing");
            out.push_back(v);
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::CorruptFile, path.string() + ":" + std::to_string(lineno) + ": bad score '" +
                                                    cells[column] + "'");
        }
    }
    return out;
}

std::vector<double> parse_levels(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::logic_error&) {
            throw UsageError("bad APCER level '" + item + "'");
        }
    }
    if (out.empty()) throw UsageError("no APCER levels given");
    return out;
}

Json slice_reports(const std::vector<ComparisonRecord>& records) {
    Json slices = Json::array();
    for (double bound : kCanonicalPmiBounds) {
        const auto sub = pmi_slice(records, bound);
        Json s{{"label", pmi_slice_label(bound)},
               {"max_pmi_hours", std::isfinite(bound) ? Json(bound) : Json(nullptr)},
               {"n_records", sub.size()}};
        s["summary"] = sub.empty() ? Json(nullptr) : to_json(summarize(sub));
        slices.push_back(std::move(s));
    }
    return slices;
}

Json group_reports(const std::vector<ComparisonRecord>& records, std::string ComparisonRecord::*field) {
    std::map<std::string, std::vector<ComparisonRecord>> groups;
    for (const auto& r : records) groups[r.*field].push_back(r);
    Json out = Json::object();
    for (const auto& [key, recs] : groups) out[key] = to_json(summarize(recs));
    return out;
}

struct Common {
    std::string config;
    std::vector<std::string> set;
    std::string channel;
    int max_shift = -1;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "key = value configuration file")->check(CLI::ExistingFile);
        app->add_option("--set", set, "override one configuration key, e.g. --set polar.cols=256");
        app->add_option("--channel", channel, "nir or rgb_red");
        app->add_option("--max-shift", max_shift, "rotation search range in polar columns");
    }

    PipelineConfig build() const {
        PipelineConfig cfg;
        try {
            if (!config.empty()) apply_config_file(cfg, config);
            for (const auto& kv : set) apply_config_text(cfg, kv);
            if (!channel.empty()) cfg.channel = parse_source_channel(channel);
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
        if (max_shift >= 0) cfg.max_shift = max_shift;
        return cfg;
    }
};

EncodeOutcome outcome_for(const Pipeline& p, const fs::path& input, const std::optional<fs::path>& mask,
                          EncoderId enc) {
    if (is_template_file(input)) return load_template(input);
    return p.try_encode(load_capture(input, mask, p.config().channel), enc);
}

std::optional<fs::path> opt_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return fs::path(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Post-mortem iris recognition workbench"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    Common common;

    // segment
    auto* segment_cmd = app.add_subcommand("segment", "Locate pupil and iris circles");
    std::string seg_image, seg_mask, seg_out;
    segment_cmd->add_option("image", seg_image)->required()->check(CLI::ExistingFile);
    segment_cmd->add_option("--mask", seg_mask, "occlusion mask image")->check(CLI::ExistingFile);
    segment_cmd->add_option("--out", seg_out, "also write the JSON here");
    common.attach(segment_cmd);

    // normalize
    auto* normalize_cmd = app.add_subcommand("normalize", "Rubber-sheet unwrap to a polar texture");
    std::string norm_image, norm_mask, norm_seg, norm_out, norm_mask_out;
    normalize_cmd->add_option("image", norm_image)->required()->check(CLI::ExistingFile);
    normalize_cmd->add_option("--mask", norm_mask)->check(CLI::ExistingFile);
    normalize_cmd->add_option("--segmentation", norm_seg, "segmentation JSON instead of running segment")
        ->check(CLI::ExistingFile);
    normalize_cmd->add_option("--out", norm_out, "polar texture (PGM)")->required();
    normalize_cmd->add_option("--mask-out", norm_mask_out, "polar usability mask (PBM)");
    common.attach(normalize_cmd);

    // encode
    auto* encode_cmd = app.add_subcommand("encode", "Produce an iris code template");
    std::string enc_image, enc_mask, enc_out, enc_name = "gabor2d";
    encode_cmd->add_option("image", enc_image)->required()->check(CLI::ExistingFile);
    encode_cmd->add_option("--mask", enc_mask)->check(CLI::ExistingFile);
    encode_cmd->add_option("--encoder", enc_name, "gabor2d, loggabor1d or bif");
    encode_cmd->add_option("--out", enc_out, "template file (.pmit)")->required();
    common.attach(encode_cmd);

    // match
    auto* match_cmd = app.add_subcommand("match", "Compare two images or templates");
    std::string match_a, match_b, match_mask_a, match_mask_b, match_enc = "gabor2d", match_heatmap, match_heatmap_json;
    match_cmd->add_option("probe", match_a, "image or .pmit template")->required()->check(CLI::ExistingFile);
    match_cmd->add_option("gallery", match_b, "image or .pmit template")->required()->check(CLI::ExistingFile);
    match_cmd->add_option("--mask-a", match_mask_a)->check(CLI::ExistingFile);
    match_cmd->add_option("--mask-b", match_mask_b)->check(CLI::ExistingFile);
    match_cmd->add_option("--encoder", match_enc, "gabor2d, loggabor1d or bif");
    match_cmd->add_option("--heatmap", match_heatmap, "write the similarity heatmap PNG here");
    match_cmd->add_option("--heatmap-json", match_heatmap_json, "write the heatmap grid as JSON here");
    common.attach(match_cmd);

    // quality
    auto* quality_cmd = app.add_subcommand("quality", "ISO-style quality metrics");
    std::string q_image, q_mask;
    double q_sharp = QualityConfig{}.sharpness_constant;
    quality_cmd->add_option("image", q_image)->required()->check(CLI::ExistingFile);
    quality_cmd->add_option("--mask", q_mask)->check(CLI::ExistingFile);
    quality_cmd->add_option("--sharpness-constant", q_sharp);
    common.attach(quality_cmd);

    // pairs
    auto* pairs_cmd = app.add_subcommand("pairs", "Enumerate genuine and impostor pairs");
    std::string pairs_meta;
    pairs_cmd->add_option("--metadata", pairs_meta)->required()->check(CLI::ExistingFile);

    // run-eval
    auto* eval_cmd = app.add_subcommand("run-eval", "Match all pairs and report metrics");
    std::string ev_meta, ev_images, ev_masks, ev_out;
    std::vector<std::string> ev_encoders;
    unsigned ev_jobs = std::max(1u, std::thread::hardware_concurrency());
    eval_cmd->add_option("--metadata", ev_meta)->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--images", ev_images, "directory image_path is relative to")->check(CLI::ExistingDirectory);
    eval_cmd->add_option("--masks", ev_masks, "directory of masks named like the images")->check(CLI::ExistingDirectory);
    eval_cmd->add_option("--encoder", ev_encoders, "repeatable; default all");
    eval_cmd->add_option("--out-dir", ev_out, "where score CSVs and reports go")->required();
    eval_cmd->add_option("--jobs", ev_jobs, "worker threads")->check(CLI::PositiveNumber);
    common.attach(eval_cmd);

    // balance
    auto* balance_cmd = app.add_subcommand("balance", "Equalize mean PMI across demographic groups");
    std::string bal_meta, bal_by = "gender", bal_out;
    BalanceOptions bal_opts;
    balance_cmd->add_option("--metadata", bal_meta)->required()->check(CLI::ExistingFile);
    balance_cmd->add_option("--by", bal_by, "gender or age_group")->check(CLI::IsMember({"gender", "age_group"}));
    balance_cmd->add_option("--tolerance", bal_opts.tolerance_hours);
    balance_cmd->add_option("--min-size", bal_opts.min_size);
    balance_cmd->add_option("--out", bal_out, "write the balanced metadata CSV here");

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "Bootstrap d' per group with ANOVA and Kruskal-Wallis");
    std::string st_scores, st_by = "gender";
    int st_reps = 30;
    double st_frac = 0.5;
    std::uint64_t st_seed = 0;
    stats_cmd->add_option("--scores", st_scores)->required()->check(CLI::ExistingFile);
    stats_cmd->add_option("--by", st_by, "gender or age_group")->check(CLI::IsMember({"gender", "age_group"}));
    stats_cmd->add_option("--reps", st_reps)->check(CLI::PositiveNumber);
    stats_cmd->add_option("--frac", st_frac)->check(CLI::Range(0.0, 1.0));
    stats_cmd->add_option("--seed", st_seed);

    // pad-eval
    auto* pad_cmd = app.add_subcommand("pad-eval", "Presentation attack detection metrics");
    std::string pad_bf, pad_pa, pad_levels = "0.0001,0.01";
    pad_cmd->add_option("--bona-fide", pad_bf)->required()->check(CLI::ExistingFile);
    pad_cmd->add_option("--attacks", pad_pa)->required()->check(CLI::ExistingFile);
    pad_cmd->add_option("--apcer", pad_levels, "comma-separated APCER levels");

    // enroll
    auto* enroll_cmd = app.add_subcommand("enroll", "Add samples to a gallery");
    std::string en_gallery, en_meta, en_images, en_masks, en_enc = "gabor2d";
    std::vector<std::string> en_only;
    enroll_cmd->add_option("--gallery", en_gallery)->required();
    enroll_cmd->add_option("--metadata", en_meta)->required()->check(CLI::ExistingFile);
    enroll_cmd->add_option("--images", en_images)->check(CLI::ExistingDirectory);
    enroll_cmd->add_option("--masks", en_masks)->check(CLI::ExistingDirectory);
    enroll_cmd->add_option("--sample-id", en_only, "enroll only these samples (repeatable)");
    enroll_cmd->add_option("--encoder", en_enc);
    common.attach(enroll_cmd);

    // identify
    auto* identify_cmd = app.add_subcommand("identify", "Rank gallery entries against a probe");
    std::string id_gallery, id_probe, id_mask, id_enc = "gabor2d";
    std::size_t id_k = 10;
    identify_cmd->add_option("--gallery", id_gallery)->required()->check(CLI::ExistingDirectory);
    identify_cmd->add_option("probe", id_probe, "image or .pmit template")->required()->check(CLI::ExistingFile);
    identify_cmd->add_option("--mask", id_mask)->check(CLI::ExistingFile);
    identify_cmd->add_option("--encoder", id_enc);
    identify_cmd->add_option("-k,--top", id_k)->check(CLI::PositiveNumber);
    common.attach(identify_cmd);

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
    std::string sv_host = "127.0.0.1", sv_data = "pmiris-data", sv_gallery;
    int sv_port = kDefaultPort;
    serve_cmd->add_option("--host", sv_host);
    serve_cmd->add_option("--port", sv_port)->check(CLI::Range(1, 65535));
    serve_cmd->add_option("--data", sv_data, "directory for uploaded images");
    serve_cmd->add_option("--gallery", sv_gallery, "gallery directory (default <data>/gallery)");
    common.attach(serve_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*segment_cmd) {
            const Pipeline p(common.build());
            const auto eye = load_capture(seg_image, opt_path(seg_mask), p.config().channel);
            const auto seg = p.segment(eye);
            const Json j = segmentation_json(seg, seg_mask.empty() ? std::nullopt : std::optional(seg_mask));
            if (!seg_out.empty()) std::ofstream(seg_out) << j.dump(2) << '\n';
            emit(j);
        } else if (*normalize_cmd) {
            const Pipeline p(common.build());
            const auto eye = load_capture(norm_image, opt_path(norm_mask), p.config().channel);
            Segmentation seg;
            if (!norm_seg.empty()) {
                std::ifstream in(norm_seg);
                std::optional<std::string> mask_path;
                seg = segmentation_from_json(Json::parse(in), &mask_path);
                const auto mask_file = norm_mask.empty() ? mask_path : std::optional(norm_mask);
                if (mask_file) {
                    seg = attach_mask(seg, eye.image, load_image(*mask_file), p.config().mask_threshold);
                }
            } else {
                seg = p.segment(eye);
            }
            const auto polar = p.normalize(eye, seg);
            write_file_bytes(norm_out, encode_pgm(polar.cols, polar.rows, polar.texture));
            if (!norm_mask_out.empty()) write_file_bytes(norm_mask_out, encode_pbm(polar.mask));
            emit(Json{{"rows", polar.rows},
                      {"cols", polar.cols},
                      {"mask_coverage", polar_mask_coverage(polar)},
                      {"texture", norm_out},
                      {"mask", norm_mask_out.empty() ? Json(nullptr) : Json(norm_mask_out)},
                      {"segmentation", segmentation_json(seg)}});
        } else if (*encode_cmd) {
            const Pipeline p(common.build());
            const auto t = p.encode(load_capture(enc_image, opt_path(enc_mask), p.config().channel),
                                    parse_encoder_id(enc_name));
            save_template(enc_out, t);
            emit(Json{{"encoder", to_string(t.encoder_id)},
                      {"rows", t.rows},
                      {"cols", t.cols},
                      {"bitplanes", t.bitplanes.size()},
                      {"mask_bits", t.mask.count()},
                      {"params_digest", to_hex(t.params_digest)},
                      {"path", enc_out}});
        } else if (*match_cmd) {
            const Pipeline p(common.build());
            EncoderId enc = parse_encoder_id(match_enc);
            if (is_template_file(match_a)) enc = load_template(match_a).encoder_id;
            else if (is_template_file(match_b)) enc = load_template(match_b).encoder_id;
            const auto a = outcome_for(p, match_a, opt_path(match_mask_a), enc);
            const auto b = outcome_for(p, match_b, opt_path(match_mask_b), enc);
            const auto outcome = p.compare(a, b);
            if ((!match_heatmap.empty() || !match_heatmap_json.empty()) && !outcome.ftm) {
                const auto hm = similarity_heatmap(std::get<IrisTemplate>(a), std::get<IrisTemplate>(b),
                                                   outcome.match->best_shift);
                if (!match_heatmap.empty()) {
                    write_file_bytes(match_heatmap, encode_png_gray(hm.cols, hm.rows, heatmap_gray(hm)));
                }
                if (!match_heatmap_json.empty()) std::ofstream(match_heatmap_json) << to_json(hm).dump() << '\n';
            }
            emit(pair_outcome_json(enc, outcome));
        } else if (*quality_cmd) {
            const Pipeline p(common.build());
            const auto eye = load_capture(q_image, opt_path(q_mask), p.config().channel);
            const auto seg = p.segment(eye);
            QualityConfig qc;
            qc.sharpness_constant = q_sharp;
            emit(Json{{"quality", to_json(compute_quality(eye.image, seg, qc))},
                      {"segmentation", segmentation_json(seg)},
                      {"non_canonical_size", eye.image.non_canonical_size()}});
        } else if (*pairs_cmd) {
            const auto meta = load_metadata_csv(pairs_meta);
            const auto sets = generate_pairs(meta);
            auto list = [&](const std::vector<SamplePair>& v) {
                Json a = Json::array();
                for (const auto& sp : v) a.push_back(Json::array({meta[sp.probe].sample_id, meta[sp.gallery].sample_id}));
                return a;
            };
            emit(Json{{"n_genuine", sets.genuine.size()},
                      {"n_impostor", sets.impostor.size()},
                      {"genuine", list(sets.genuine)},
                      {"impostor", list(sets.impostor)}});
        } else if (*eval_cmd) {
            const Pipeline p(common.build());
            const auto meta = load_metadata_csv(ev_meta);
            const auto encoders = parse_encoders(ev_encoders);
            const fs::path image_root = ev_images.empty() ? fs::path(ev_meta).parent_path() : fs::path(ev_images);
            fs::create_directories(ev_out);

            std::vector<EyeCapture> eyes;
            eyes.reserve(meta.size());
            for (const auto& m : meta) {
                std::optional<fs::path> mask;
                if (!ev_masks.empty()) {
                    const fs::path candidate = fs::path(ev_masks) / fs::path(m.image_path).filename();
                    if (fs::exists(candidate)) mask = candidate;
                }
                eyes.push_back(load_capture(image_root / m.image_path, mask, p.config().channel));
            }
            const auto sets = generate_pairs(meta);
            std::vector<SamplePair> all = sets.genuine;
            all.insert(all.end(), sets.impostor.begin(), sets.impostor.end());
            std::sort(all.begin(), all.end(), [&](const SamplePair& x, const SamplePair& y) {
                return std::tie(meta[x.probe].sample_id, meta[x.gallery].sample_id) <
                       std::tie(meta[y.probe].sample_id, meta[y.gallery].sample_id);
            });

            Json report{{"n_samples", meta.size()}, {"encoders", Json::array()}};
            for (const auto enc : encoders) {
                std::vector<EncodeOutcome> templates(meta.size(), PipelineFailure{ErrorCode::Io, ""});
                parallel_for(meta.size(), ev_jobs, [&](std::size_t i) { templates[i] = p.try_encode(eyes[i], enc); });
                std::size_t failed = 0;
                for (std::size_t i = 0; i < meta.size(); ++i) {
                    if (const auto* f = std::get_if<PipelineFailure>(&templates[i])) {
                        ++failed;
                        log(to_string(enc) + ": " + meta[i].sample_id + " not encoded: " + f->message);
                    }
                }
                std::vector<ComparisonRecord> records(all.size());
                parallel_for(all.size(), ev_jobs, [&](std::size_t i) {
                    const auto& sp = all[i];
                    records[i] = to_record(p.compare(templates[sp.probe], templates[sp.gallery]), meta[sp.probe],
                                           meta[sp.gallery]);
                });
                const fs::path csv = fs::path(ev_out) / ("scores_" + to_string(enc) + ".csv");
                {
                    std::ofstream out(csv);
                    write_score_csv(out, records);
                    if (!out) throw Error(ErrorCode::Io, "cannot write " + csv.string());
                }
                Json r{{"encoder", to_string(enc)},
                       {"score_csv", csv.string()},
                       {"failed_samples", failed},
                       {"slices", slice_reports(records)},
                       {"gender", group_reports(records, &ComparisonRecord::gender)},
                       {"age_group", group_reports(records, &ComparisonRecord::age_group)}};
                const fs::path rp = fs::path(ev_out) / ("report_" + to_string(enc) + ".json");
                std::ofstream(rp) << r.dump(2) << '\n';
                log(to_string(enc) + ": " + std::to_string(records.size()) + " pairs -> " + csv.string());
                report["encoders"].push_back(std::move(r));
            }
            emit(report);
        } else if (*balance_cmd) {
            const auto meta = load_metadata_csv(bal_meta);
            std::map<std::string, std::vector<SampleMetadata>> groups;
            std::vector<std::string> excluded;
            if (bal_by == "gender") {
                for (const auto& m : meta) {
                    if (m.gender == Gender::unknown) excluded.push_back(m.sample_id);
                    else groups[to_string(m.gender)].push_back(m);
                }
            } else {
                const auto split = split_age_groups(meta);
                for (int g = 0; g < 3; ++g) {
                    if (!split.groups[g].empty()) groups[std::to_string(g + 1)] = split.groups[g];
                }
                excluded = split.excluded;
            }
            const auto res = balance_pmi(groups, bal_opts);
            Json j = to_json(res);
            j["by"] = bal_by;
            j["excluded"] = excluded;
            if (!bal_out.empty()) {
                std::vector<SampleMetadata> kept;
                for (const auto& [label, members] : res.groups) kept.insert(kept.end(), members.begin(), members.end());
                std::sort(kept.begin(), kept.end(),
                          [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });
                std::ofstream out(bal_out);
                write_metadata_csv(out, kept);
                j["out"] = bal_out;
            }
            emit(j);
        } else if (*stats_cmd) {
            const auto records = load_score_csv(st_scores);
            std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
            for (const auto& r : records) {
                if (r.ftm || !r.score) continue;
                const std::string& key = st_by == "gender" ? r.gender : r.age_group;
                if (key == "mixed" || key == "excluded" || key == "unknown") continue;
                auto& g = groups[key];
                (r.label == PairLabel::genuine ? g.first : g.second).push_back(*r.score);
            }
            if (groups.size() < 2) throw Error(ErrorCode::DegenerateInput, "need at least two groups with scores");
            Json per_group = Json::object();
            std::vector<std::vector<double>> dvecs;
            for (const auto& [key, g] : groups) {
                auto d = bootstrap_dprime(g.first, g.second, st_reps, st_frac, st_seed);
                per_group[key] = Json{{"n_genuine", g.first.size()}, {"n_impostor", g.second.size()}, {"dprime", d}};
                dvecs.push_back(std::move(d));
            }
            emit(Json{{"by", st_by},
                      {"seed", st_seed},
                      {"reps", st_reps},
                      {"frac", st_frac},
                      {"groups", per_group},
                      {"anova", to_json(anova_oneway(dvecs))},
                      {"kruskal_wallis", to_json(kruskal_wallis(dvecs))}});
        } else if (*pad_cmd) {
            const auto levels = parse_levels(pad_levels);
            const auto bf = read_score_column(pad_bf);
            const auto pa = read_score_column(pad_pa);
            Json j = to_json(pad_metrics(bf, pa, levels));
            j["n_bona_fide"] = bf.size();
            j["n_attack"] = pa.size();
            emit(j);
        } else if (*enroll_cmd) {
            const Pipeline p(common.build());
            const EncoderId enc = parse_encoder_id(en_enc);
            Gallery gallery(en_gallery);
            const auto meta = load_metadata_csv(en_meta);
            const fs::path image_root = en_images.empty() ? fs::path(en_meta).parent_path() : fs::path(en_images);
            Json enrolled = Json::array(), failed = Json::array();
            for (const auto& m : meta) {
                if (!en_only.empty() && std::find(en_only.begin(), en_only.end(), m.sample_id) == en_only.end()) continue;
                std::optional<fs::path> mask;
                if (!en_masks.empty() && fs::exists(fs::path(en_masks) / fs::path(m.image_path).filename())) {
                    mask = fs::path(en_masks) / fs::path(m.image_path).filename();
                }
                const auto outcome = p.try_encode(load_capture(image_root / m.image_path, mask, p.config().channel), enc);
                if (const auto* f = std::get_if<PipelineFailure>(&outcome)) {
                    failed.push_back(Json{{"sample_id", m.sample_id}, {"error_code", to_string(f->code)}});
                    continue;
                }
                enrolled.push_back(gallery.enroll(std::get<IrisTemplate>(outcome), m));
            }
            emit(Json{{"gallery", en_gallery},
                      {"encoder", to_string(enc)},
                      {"enrolled", enrolled},
                      {"failed", failed},
                      {"size", gallery.size()}});
        } else if (*identify_cmd) {
            const Pipeline p(common.build());
            EncoderId enc = parse_encoder_id(id_enc);
            if (is_template_file(id_probe)) enc = load_template(id_probe).encoder_id;
            const auto probe = outcome_for(p, id_probe, opt_path(id_mask), enc);
            Json out{{"encoder", to_string(enc)}, {"k", id_k}};
            if (const auto* f = std::get_if<PipelineFailure>(&probe)) {
                out["ftm"] = true;
                out["error_code"] = to_string(f->code);
                out["candidates"] = Json::array();
            } else {
                const Gallery gallery(id_gallery);
                const auto res = gallery.identify(std::get<IrisTemplate>(probe), id_k, p.template_max_shift(enc),
                                                  p.config().overlap_floor);
                out.update(identify_json(res, angular_stride(enc, p.config().gabor)));
            }
            emit(out);
        } else if (*serve_cmd) {
            ServiceConfig sc;
            sc.data_dir = sv_data;
            if (!sv_gallery.empty()) sc.gallery_dir = sv_gallery;
            sc.pipeline = common.build();
            Service service(sc);
            log("listening on " + sv_host + ":" + std::to_string(sv_port));
            run_server(service, sv_host, sv_port);
        }
    } catch (const UsageError& e) {
        log(e.what());
        return kExitUsage;
    } catch (const Error& e) {
        log(e.what());
        return kExitData;
    } catch (const nlohmann::json::exception& e) {
        log(std::string("malformed JSON: ") + e.what());
        return kExitData;
    } catch (const std::exception& e) {
        log(std::string("internal error: ") + e.what());
        return kExitInternal;
    }
    return kExitOk;
}
