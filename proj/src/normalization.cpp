#include "pmiris/normalization.hpp"

#include "pmiris/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pmiris {

PolarIris rubber_sheet(const IrisImage& img, const Segmentation& seg, int rows, int cols) {
    if (rows < 8 || cols < 64) throw Error(ErrorCode::InvalidArgument, "polar grid must be at least 8x64");
    seg.validate();
    if (seg.occlusion_mask &&
        (seg.occlusion_mask->cols() != img.width() || seg.occlusion_mask->rows() != img.height())) {
        throw Error(ErrorCode::DimensionMismatch, "occlusion mask does not match the image");
    }

    PolarIris p;
    p.rows = rows;
    p.cols = cols;
    p.texture.assign(static_cast<std::size_t>(rows) * cols, 0);
    p.mask = Bitmap(rows, cols);

    auto usable = [&](int x, int y) {
        return img.contains(x, y) && (!seg.occlusion_mask || seg.occlusion_mask->at(y, x));
    };

    std::size_t outside = 0;
    for (int c = 0; c < cols; ++c) {
        const double theta = 2.0 * std::numbers::pi * c / cols;
        const double ct = std::cos(theta), st = std::sin(theta);
        const double px = seg.pupil.cx + seg.pupil.r * ct, py = seg.pupil.cy + seg.pupil.r * st;
        const double ix = seg.iris.cx + seg.iris.r * ct, iy = seg.iris.cy + seg.iris.r * st;
        for (int r = 0; r < rows; ++r) {
            const double t = (r + 0.5) / rows;
            const double x = px + t * (ix - px);
            const double y = py + t * (iy - py);
            const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
            if (!img.contains(x0, y0) || !img.contains(x0 + 1, y0 + 1)) {
                ++outside;
                continue;
            }
            const double fx = x - x0, fy = y - y0;
            const double v = (1 - fx) * (1 - fy) * img.at(x0, y0) + fx * (1 - fy) * img.at(x0 + 1, y0) +
                             (1 - fx) * fy * img.at(x0, y0 + 1) + fx * fy * img.at(x0 + 1, y0 + 1);
            p.texture[static_cast<std::size_t>(r) * cols + c] =
                static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
            p.mask.set(r, c, usable(x0, y0) && usable(x0 + 1, y0) && usable(x0, y0 + 1) && usable(x0 + 1, y0 + 1));
        }
    }
    if (static_cast<double>(outside) > 0.95 * rows * cols) {
        throw Error(ErrorCode::OutOfFrame, "more than 95% of polar samples fall outside the image");
    }
    return p;
}

double polar_mask_coverage(const PolarIris& p) {
    if (p.rows == 0 || p.cols == 0) return 0.0;
    return static_cast<double>(p.mask.count()) / (static_cast<double>(p.rows) * p.cols);
}

}  // namespace pmiris
