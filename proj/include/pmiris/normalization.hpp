#pragma once

#include "pmiris/types.hpp"

namespace pmiris {

inline constexpr int kDefaultPolarRows = 64;
inline constexpr int kDefaultPolarCols = 512;

/// Daugman rubber sheet. Row r samples the fraction (r + 0.5) / rows of the way
/// from the pupil boundary to the iris boundary at angle 2*pi*col/cols, with
/// bilinear interpolation. A mask bit is 1 iff all four interpolation
/// neighbours are in frame and usable. Throws DegenerateGeometry, OutOfFrame
/// (more than 95% of samples outside the image) or InvalidArgument (grid too small).
PolarIris rubber_sheet(const IrisImage& img, const Segmentation& seg, int rows = kDefaultPolarRows,
                       int cols = kDefaultPolarCols);

/// Fraction of usable polar cells.
double polar_mask_coverage(const PolarIris& p);

}  // namespace pmiris
