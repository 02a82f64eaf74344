#include "pmiris/pipeline.hpp"
#include "pmiris/synthetic.hpp"

#include "../support/check.hpp"

#include <cmath>
#include <numbers>

using namespace pmiris;

namespace {

EyeCapture capture(std::uint64_t identity, double rotation_deg, std::uint64_t noise_seed = 1) {
    synth::CaptureParams p;
    p.rotation = rotation_deg * std::numbers::pi / 180;
    p.noise_sigma = 4;
    p.noise_seed = noise_seed;
    return EyeCapture{synth::render_eye(synth::IrisPattern::random(identity), p).image, std::nullopt};
}

SampleMetadata meta(std::string id, std::string subject) {
    return SampleMetadata{std::move(id), std::move(subject), Eye::left, 1, 12, 40, Gender::female, ""};
}

}  // namespace

TEST_CASE("same eye two degrees apart matches at the expected shift") {
    const Pipeline pipe;
    const auto a = capture(31, 0), b = capture(31, 2, 2);
    for (auto enc : {EncoderId::gabor2d, EncoderId::loggabor1d, EncoderId::bif}) {
        const auto rec = pipe.match_images(b, meta("b", "S"), a, meta("a", "S"), enc);
        CHECK_FALSE(rec.ftm);
        REQUIRE(rec.score.has_value());
        CHECK(*rec.score < 0.2);
        // probe rotated +2 deg relative to the gallery: +round(2/360*512) = +3 columns
        CHECK(std::abs(rec.best_shift - 3) <= 1);
        CHECK(rec.label == PairLabel::genuine);
    }
}

TEST_CASE("a blank probe is a failure to match, not an error") {
    const Pipeline pipe;
    const EyeCapture blank{IrisImage("blank", 640, 480, std::vector<std::uint8_t>(640 * 480, 0)), std::nullopt};
    const auto rec = pipe.match_images(blank, meta("x", "S1"), capture(1, 0), meta("y", "S2"), EncoderId::gabor2d);
    CHECK(rec.ftm);
    CHECK_FALSE(rec.score.has_value());
    const auto outcome = pipe.try_encode(blank, EncoderId::bif);
    REQUIRE(std::holds_alternative<PipelineFailure>(outcome));
    CHECK(std::get<PipelineFailure>(outcome).code == ErrorCode::NoBoundaryFound);
}

TEST_CASE("different identities score near one half") {
    const Pipeline pipe;
    for (auto enc : {EncoderId::gabor2d, EncoderId::loggabor1d, EncoderId::bif}) {
        const auto rec = pipe.match_images(capture(100, 0), meta("a", "S1"), capture(200, 0), meta("b", "S2"), enc);
        REQUIRE(rec.score.has_value());
        CHECK(*rec.score >= 0.4);
        CHECK(*rec.score <= 0.6);
    }
}

TEST_CASE("external masks remove occluded texture from the template") {
    const Pipeline pipe;
    synth::CaptureParams p;
    p.occlusion_fraction = 0.2;
    const auto eye = synth::render_eye(synth::IrisPattern::random(5), p);
    const auto without = pipe.encode(EyeCapture{eye.image, std::nullopt}, EncoderId::loggabor1d);
    const auto with = pipe.encode(EyeCapture{eye.image, eye.mask}, EncoderId::loggabor1d);
    CHECK(with.mask.count() < without.mask.count());
    const double frac = 1.0 - static_cast<double>(with.mask.count()) / static_cast<double>(without.mask.count());
    CHECK(frac > 0.1);
}

TEST_CASE("config text sets every documented key") {
    PipelineConfig cfg;
    apply_config_text(cfg, R"(
# comment line
hough.pupil_r_min = 20
hough.pupil_r_max = 70
hough.iris_r_min = 90   # trailing comment
hough.iris_r_max = 180
hough.gradient_threshold = 15.5
hough.accumulator_step = 3
hough.contrast_gamma = 0.7
hough.min_peak_support = 0.2
polar.rows = 32
polar.cols = 256
gabor.wavelengths = 16, 24
gabor.sigma_ratio = 0.4
gabor.orientations = 0, 0.25
gabor.stride_radial = 2
gabor.stride_angular = 4
loggabor.center_wavelength = 12
loggabor.sigma_on_f = 0.6
match.max_shift = 20
match.overlap_floor = 0.2
mask.threshold = 100
image.channel = rgb_red
)");
    CHECK(cfg.hough.pupil_r_range.min == 20);
    CHECK(cfg.hough.pupil_r_range.max == 70);
    CHECK(cfg.hough.iris_r_range.min == 90);
    CHECK(cfg.hough.iris_r_range.max == 180);
    CHECK(cfg.hough.gradient_threshold == 15.5);
    CHECK(cfg.hough.accumulator_step == 3);
    CHECK(cfg.hough.contrast_gamma == 0.7);
    CHECK(cfg.hough.min_peak_support == 0.2);
    CHECK(cfg.polar_rows == 32);
    CHECK(cfg.polar_cols == 256);
    CHECK(cfg.gabor.wavelengths == std::vector<double>{16, 24});
    CHECK(cfg.gabor.sigma_ratio == 0.4);
    CHECK(cfg.gabor.orientations == std::vector<double>{0, 0.25});
    CHECK(cfg.gabor.grid_stride.radial == 2);
    CHECK(cfg.gabor.grid_stride.angular == 4);
    CHECK(cfg.loggabor.center_wavelength == 12);
    CHECK(cfg.loggabor.sigma_on_f == 0.6);
    CHECK(cfg.max_shift == 20);
    CHECK(cfg.overlap_floor == 0.2);
    CHECK(cfg.mask_threshold == 100);
    CHECK(cfg.channel == SourceChannel::rgb_red);

    CHECK_ERROR_CODE(apply_config_text(cfg, "nope = 1"), ErrorCode::InvalidArgument);
    CHECK_ERROR_CODE(apply_config_text(cfg, "polar.rows"), ErrorCode::InvalidArgument);
    CHECK_ERROR_CODE(apply_config_text(cfg, "polar.rows = many"), ErrorCode::InvalidArgument);
}

TEST_CASE("template shift range follows the angular stride") {
    PipelineConfig cfg;
    cfg.max_shift = 16;
    const Pipeline pipe(cfg);
    CHECK(pipe.template_max_shift(EncoderId::gabor2d) == 8);
    CHECK(pipe.template_max_shift(EncoderId::loggabor1d) == 16);
    CHECK(pipe.template_max_shift(EncoderId::bif) == 16);
}
