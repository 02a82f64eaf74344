#pragma once

#include "pmiris/image.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace pmiris::synth {

/// Procedural iris texture: a sum of sinusoids periodic in angle, so a rendered
/// rotation is exact rather than resampled.
struct IrisPattern {
    struct Wave {
        int angular_cycles;
        double radial_cycles;
        double phase;
        double amplitude;
    };
    double base = 110.0;
    std::vector<Wave> waves;

    static IrisPattern random(std::uint64_t seed, int wave_count = 32);
    /// rho in [0,1] from pupil to iris boundary; theta in radians.
    double value(double rho, double theta) const;
};

struct CaptureParams {
    int width = 640;
    int height = 480;
    double cx = 320;
    double cy = 240;
    double pupil_r = 40;
    double iris_r = 120;
    double rotation = 0;  // radians, positive = increasing image angle
    double noise_sigma = 0;
    std::uint64_t noise_seed = 1;
    /// Fraction of the annulus hidden under an upper eyelid (0 = none).
    double occlusion_fraction = 0;
    /// Adds per-pixel high-frequency detail in the iris (sharpness fixtures).
    bool fine_texture = false;
    double pupil_level = 25;
    double sclera_level = 210;
    double eyelid_level = 150;
};

struct RenderedEye {
    IrisImage image;
    IrisImage mask;  // 255 = usable, 0 = occluded
};

RenderedEye render_eye(const IrisPattern& pattern, const CaptureParams& p, std::string id = "synthetic");

/// Three-tone target used by the segmentation examples: black disk r_p on a
/// mid-gray disk r_i on white.
IrisImage render_disks(int width, int height, double cx, double cy, double pupil_r, double iris_r);

/// 5x5 box blur with edge replication.
IrisImage box_blur5(const IrisImage& img);

}  // namespace pmiris::synth
