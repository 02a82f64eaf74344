#pragma once

#include "pmiris/types.hpp"

#include <cstdint>

namespace pmiris {

struct RadiusRange {
    int min = 0;
    int max = 0;
};

/// Parameters of the contrast-adjusted circular Hough search.
struct HoughConfig {
    RadiusRange pupil_r_range{16, 75};
    RadiusRange iris_r_range{80, 200};
    double gradient_threshold = 20.0;  // gray levels on the gamma-adjusted, smoothed image
    int accumulator_step = 2;          // coarse radius step; refined at 1 px around the coarse peak
    double contrast_gamma = 0.8;
    /// Peak support (votes / 2*pi*r) below this is NoBoundaryFound.
    double min_peak_support = 0.12;

    /// Throws InvalidArgument on invariant violations.
    void validate() const;
};

/// Locates iris then pupil boundaries. Throws InvalidArgument for a bad config
/// or ranges that cannot fit the image, NoBoundaryFound when the accumulator
/// peak is too weak, DegenerateGeometry for an impossible fit.
Segmentation segment(const IrisImage& img, const HoughConfig& cfg = {});

/// Sets occlusion_mask bit = 1 where mask pixel >= threshold.
Segmentation attach_mask(Segmentation seg, const IrisImage& source, const IrisImage& mask_image,
                         std::uint8_t threshold = 128);

/// 1 exactly on pixel centres inside the iris circle and outside the pupil circle.
Bitmap default_annulus_mask(const Segmentation& seg, int width, int height);

}  // namespace pmiris
