#pragma once

#include "pmiris/image.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pmiris {

struct Circle {
    double cx = 0;
    double cy = 0;
    double r = 0;

    bool contains(double x, double y) const {
        const double dx = x - cx, dy = y - cy;
        return dx * dx + dy * dy <= r * r;
    }
    friend bool operator==(const Circle&, const Circle&) = default;
};

/// Pupil and iris boundaries plus an optional usability mask in image coordinates.
struct Segmentation {
    Circle pupil;
    Circle iris;
    std::optional<Bitmap> occlusion_mask;  // 1 = usable iris texture

    /// Throws DegenerateGeometry unless 0 < pupil.r < iris.r and the pupil centre is inside the iris.
    void validate() const;
};

/// Rubber-sheet unwrapped iris: row = radial position, column a = angle 2*pi*a/cols.
struct PolarIris {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> texture;
    Bitmap mask;

    std::uint8_t at(int r, int c) const { return texture[static_cast<std::size_t>(r) * cols + c]; }
};

enum class EncoderId : std::uint8_t { gabor2d = 1, loggabor1d = 2, bif = 3 };

std::string to_string(EncoderId id);
EncoderId parse_encoder_id(const std::string& text);

struct IrisTemplate {
    EncoderId encoder_id = EncoderId::gabor2d;
    int rows = 0;
    int cols = 0;
    std::vector<Bitmap> bitplanes;
    Bitmap mask;
    std::uint64_t params_digest = 0;

    /// Throws InvalidArgument when plane/mask dimensions disagree or there are no planes.
    void validate() const;
    friend bool operator==(const IrisTemplate&, const IrisTemplate&) = default;
};

struct QualityRecord {
    std::optional<double> usable_iris_area;
    std::optional<double> iris_sclera_contrast;
    std::optional<double> gray_scale_utilization;
    double iris_radius = 0;
    double pupil_iris_ratio = 0;
    double iris_pupil_concentricity = 0;
    std::optional<double> sharpness;
};

}  // namespace pmiris
