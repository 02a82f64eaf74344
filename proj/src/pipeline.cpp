#include "pmiris/pipeline.hpp"

#include "pmiris/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace pmiris {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw Error(ErrorCode::InvalidArgument, key + ": not a number");
    return out;
}

int to_int(const std::string& key, const std::string& v) {
    int out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw Error(ErrorCode::InvalidArgument, key + ": not an integer");
    return out;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    if (out.empty()) throw Error(ErrorCode::InvalidArgument, key + ": empty list");
    return out;
}

}  // namespace

void apply_config_text(PipelineConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::InvalidArgument, "config line " + std::to_string(lineno) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto val = trim(line.substr(eq + 1));
        if (key == "hough.pupil_r_min") cfg.hough.pupil_r_range.min = to_int(key, val);
        else if (key == "hough.pupil_r_max") cfg.hough.pupil_r_range.max = to_int(key, val);
        else if (key == "hough.iris_r_min") cfg.hough.iris_r_range.min = to_int(key, val);
        else if (key == "hough.iris_r_max") cfg.hough.iris_r_range.max = to_int(key, val);
        else if (key == "hough.gradient_threshold") cfg.hough.gradient_threshold = to_double(key, val);
        else if (key == "hough.accumulator_step") cfg.hough.accumulator_step = to_int(key, val);
        else if (key == "hough.contrast_gamma") cfg.hough.contrast_gamma = to_double(key, val);
        else if (key == "hough.min_peak_support") cfg.hough.min_peak_support = to_double(key, val);
        else if (key == "polar.rows") cfg.polar_rows = to_int(key, val);
        else if (key == "polar.cols") cfg.polar_cols = to_int(key, val);
        else if (key == "gabor.wavelengths") cfg.gabor.wavelengths = to_list(key, val);
        else if (key == "gabor.sigma_ratio") cfg.gabor.sigma_ratio = to_double(key, val);
        else if (key == "gabor.orientations") cfg.gabor.orientations = to_list(key, val);
        else if (key == "gabor.stride_radial") cfg.gabor.grid_stride.radial = to_int(key, val);
        else if (key == "gabor.stride_angular") cfg.gabor.grid_stride.angular = to_int(key, val);
        else if (key == "loggabor.center_wavelength") cfg.loggabor.center_wavelength = to_double(key, val);
        else if (key == "loggabor.sigma_on_f") cfg.loggabor.sigma_on_f = to_double(key, val);
        else if (key == "bif.kernel_bank") cfg.kernel_bank_path = val.empty() ? std::nullopt : std::optional<std::filesystem::path>(val);
        else if (key == "match.max_shift") cfg.max_shift = to_int(key, val);
        else if (key == "match.overlap_floor") cfg.overlap_floor = to_double(key, val);
        else if (key == "mask.threshold") {
            const int t = to_int(key, val);
            if (t < 0 || t > 255) throw Error(ErrorCode::InvalidArgument, key + ": must be 0..255");
            cfg.mask_threshold = static_cast<std::uint8_t>(t);
        } else if (key == "image.channel") cfg.channel = parse_source_channel(val);
        else throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    }
}

void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    apply_config_text(cfg, ss.str());
}

Pipeline::Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)), bank_(load_kernel_bank(cfg_.kernel_bank_path)) {
    cfg_.hough.validate();
    cfg_.gabor.validate();
    cfg_.loggabor.validate();
    if (cfg_.max_shift < 0) throw Error(ErrorCode::InvalidArgument, "max_shift must be >= 0");
    if (!(cfg_.overlap_floor >= 0 && cfg_.overlap_floor <= 1)) {
        throw Error(ErrorCode::InvalidArgument, "overlap_floor must be in [0,1]");
    }
}

Segmentation Pipeline::segment(const EyeCapture& eye) const {
    auto seg = pmiris::segment(eye.image, cfg_.hough);
    if (eye.mask) seg = attach_mask(std::move(seg), eye.image, *eye.mask, cfg_.mask_threshold);
    return seg;
}

PolarIris Pipeline::normalize(const EyeCapture& eye, const Segmentation& seg) const {
    return rubber_sheet(eye.image, seg, cfg_.polar_rows, cfg_.polar_cols);
}

IrisTemplate Pipeline::encode(const PolarIris& polar, EncoderId encoder) const {
    switch (encoder) {
        case EncoderId::gabor2d: return encode_gabor2d(polar, cfg_.gabor);
        case EncoderId::loggabor1d: return encode_loggabor1d(polar, cfg_.loggabor);
        case EncoderId::bif: return encode_bif(polar, bank_);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown encoder");
}

IrisTemplate Pipeline::encode(const EyeCapture& eye, EncoderId encoder) const {
    const auto seg = segment(eye);
    return encode(normalize(eye, seg), encoder);
}

EncodeOutcome Pipeline::try_encode(const EyeCapture& eye, EncoderId encoder) const {
    try {
        return encode(eye, encoder);
    } catch (const Error& e) {
        if (!is_pipeline_failure(e.code())) throw;
        return PipelineFailure{e.code(), e.what()};
    }
}

int Pipeline::template_max_shift(EncoderId encoder) const {
    return cfg_.max_shift / angular_stride(encoder, cfg_.gabor);
}

PairOutcome Pipeline::compare(const IrisTemplate& probe, const IrisTemplate& gallery) const {
    PairOutcome out;
    try {
        out.match = fractional_hamming(probe, gallery, template_max_shift(probe.encoder_id), cfg_.overlap_floor);
        out.ftm = false;
        out.best_shift_polar = out.match->best_shift * angular_stride(probe.encoder_id, cfg_.gabor);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientOverlap) throw;
        out.failure = PipelineFailure{e.code(), e.what()};
    }
    return out;
}

PairOutcome Pipeline::compare(const EncodeOutcome& probe, const EncodeOutcome& gallery) const {
    if (const auto* f = std::get_if<PipelineFailure>(&probe)) return PairOutcome{true, std::nullopt, 0, *f};
    if (const auto* f = std::get_if<PipelineFailure>(&gallery)) return PairOutcome{true, std::nullopt, 0, *f};
    return compare(std::get<IrisTemplate>(probe), std::get<IrisTemplate>(gallery));
}

ComparisonRecord Pipeline::match_images(const EyeCapture& probe, const SampleMetadata& probe_meta,
                                        const EyeCapture& gallery, const SampleMetadata& gallery_meta,
                                        EncoderId encoder) const {
    return to_record(compare(try_encode(probe, encoder), try_encode(gallery, encoder)), probe_meta, gallery_meta);
}

EyeCapture load_capture(const std::filesystem::path& image, const std::optional<std::filesystem::path>& mask,
                        SourceChannel channel) {
    EyeCapture eye{load_image(image, channel), std::nullopt};
    if (mask) eye.mask = load_image(*mask, SourceChannel::nir);
    return eye;
}

ComparisonRecord to_record(const PairOutcome& outcome, const SampleMetadata& probe, const SampleMetadata& gallery) {
    auto rec = make_record(probe, gallery);
    rec.ftm = outcome.ftm;
    if (!outcome.ftm) {
        rec.score = outcome.match->score;
        rec.best_shift = outcome.best_shift_polar;
    }
    return rec;
}

}  // namespace pmiris
