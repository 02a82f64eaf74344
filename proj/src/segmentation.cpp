#include "pmiris/segmentation.hpp"

#include "pmiris/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace pmiris {

void HoughConfig::validate() const {
    if (pupil_r_range.min <= 0 || pupil_r_range.min >= pupil_r_range.max) {
        throw Error(ErrorCode::InvalidArgument, "pupil_r_range must satisfy 0 < min < max");
    }
    if (iris_r_range.min <= 0 || iris_r_range.min >= iris_r_range.max) {
        throw Error(ErrorCode::InvalidArgument, "iris_r_range must satisfy 0 < min < max");
    }
    if (pupil_r_range.max >= iris_r_range.max) {
        throw Error(ErrorCode::InvalidArgument, "pupil range upper bound must be below iris range upper bound");
    }
    if (!(contrast_gamma > 0)) throw Error(ErrorCode::InvalidArgument, "contrast_gamma must be > 0");
    if (accumulator_step < 1) throw Error(ErrorCode::InvalidArgument, "accumulator_step must be >= 1");
    if (gradient_threshold < 0) throw Error(ErrorCode::InvalidArgument, "gradient_threshold must be >= 0");
}

namespace {

struct EdgePoint {
    float x, y;    // pixel position
    float ux, uy;  // unit gradient direction
};

struct Peak {
    double support = -1;
    int cx = 0, cy = 0, r = 0;
};

// Gamma-adjusted, binomially smoothed intensities followed by a 3x3 Sobel.
std::vector<EdgePoint> edge_points(const IrisImage& img, const HoughConfig& cfg) {
    const int w = img.width(), h = img.height();
    const auto px = img.pixels();
    const auto [lo, hi] = std::minmax_element(px.begin(), px.end());
    if (*lo == *hi) return {};
    const double range = *hi - *lo;

    std::vector<double> lut(256);
    for (int v = 0; v < 256; ++v) {
        const double n = std::clamp((v - *lo) / range, 0.0, 1.0);
        lut[static_cast<std::size_t>(v)] = 255.0 * std::pow(n, cfg.contrast_gamma);
    }
    std::vector<double> adj(px.size());
    for (std::size_t i = 0; i < px.size(); ++i) adj[i] = lut[px[i]];

    // separable [1 4 6 4 1]/16 with edge replication
    static constexpr double k[5] = {1 / 16.0, 4 / 16.0, 6 / 16.0, 4 / 16.0, 1 / 16.0};
    std::vector<double> tmp(px.size()), smooth(px.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0;
            for (int d = -2; d <= 2; ++d) s += k[d + 2] * adj[static_cast<std::size_t>(y) * w + std::clamp(x + d, 0, w - 1)];
            tmp[static_cast<std::size_t>(y) * w + x] = s;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0;
            for (int d = -2; d <= 2; ++d) s += k[d + 2] * tmp[static_cast<std::size_t>(std::clamp(y + d, 0, h - 1)) * w + x];
            smooth[static_cast<std::size_t>(y) * w + x] = s;
        }
    }

    std::vector<EdgePoint> edges;
    auto at = [&](int x, int y) { return smooth[static_cast<std::size_t>(y) * w + x]; };
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            const double gx = (at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1) - at(x - 1, y - 1) -
                               2 * at(x - 1, y) - at(x - 1, y + 1)) / 4.0;
            const double gy = (at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1) - at(x - 1, y - 1) -
                               2 * at(x, y - 1) - at(x + 1, y - 1)) / 4.0;
            const double mag = std::hypot(gx, gy);
            if (mag >= cfg.gradient_threshold && mag > 0) {
                edges.push_back({static_cast<float>(x), static_cast<float>(y), static_cast<float>(gx / mag),
                                 static_cast<float>(gy / mag)});
            }
        }
    }
    return edges;
}

// Dark-inside circles: the gradient points outward, so centres lie at p - r*u.
// `admissible(cx, cy, r)` restricts candidate centres.
template <class Admissible>
Peak best_circle(const std::vector<EdgePoint>& edges, int w, int h, int r_lo, int r_hi, int step,
                 Admissible admissible) {
    std::vector<float> acc(static_cast<std::size_t>(w) * h);
    Peak best;
    auto evaluate = [&](int r) {
        std::fill(acc.begin(), acc.end(), 0.0f);
        for (const auto& e : edges) {
            const int cx = static_cast<int>(std::lround(e.x - r * e.ux));
            const int cy = static_cast<int>(std::lround(e.y - r * e.uy));
            if (cx >= 0 && cy >= 0 && cx < w && cy < h) acc[static_cast<std::size_t>(cy) * w + cx] += 1.0f;
        }
        const double norm = 2.0 * std::numbers::pi * r;
        for (int cy = 1; cy < h - 1; ++cy) {
            for (int cx = 1; cx < w - 1; ++cx) {
                if (acc[static_cast<std::size_t>(cy) * w + cx] == 0.0f) continue;
                double s = 0;
                for (int dy = -1; dy <= 1; ++dy) {
                    const float* row = &acc[static_cast<std::size_t>(cy + dy) * w + cx - 1];
                    s += row[0] + row[1] + row[2];
                }
                const double support = s / norm;
                if (support > best.support && admissible(cx, cy, r)) best = {support, cx, cy, r};
            }
        }
    };
    // coarse pass
    Peak coarse;
    for (int r = r_lo; r <= r_hi; r += step) {
        const Peak before = best;
        evaluate(r);
        if (best.support > before.support) coarse = best;
    }
    if (step > 1 && coarse.support >= 0) {
        best = {};
        const int lo = std::max(r_lo, coarse.r - step + 1);
        const int hi = std::min(r_hi, coarse.r + step - 1);
        for (int r = lo; r <= hi; ++r) evaluate(r);
    }
    return best;
}

}  // namespace

Segmentation segment(const IrisImage& img, const HoughConfig& cfg) {
    cfg.validate();
    const int w = img.width(), h = img.height();
    if (2 * cfg.iris_r_range.min > std::min(w, h) || 2 * cfg.pupil_r_range.min > std::min(w, h)) {
        throw Error(ErrorCode::InvalidArgument, "radius ranges do not fit inside the image");
    }
    const auto edges = edge_points(img, cfg);
    if (edges.empty()) throw Error(ErrorCode::NoBoundaryFound, "no gradients above threshold");

    const Peak iris = best_circle(edges, w, h, cfg.iris_r_range.min, cfg.iris_r_range.max, cfg.accumulator_step,
                                  [](int, int, int) { return true; });
    if (iris.support < cfg.min_peak_support) {
        throw Error(ErrorCode::NoBoundaryFound, "iris accumulator peak too weak");
    }

    // Pupil: only edges well inside the iris, centres whose circle stays inside it.
    std::vector<EdgePoint> inner;
    const double inner_r = iris.r - 2.0;
    for (const auto& e : edges) {
        if (std::hypot(e.x - iris.cx, e.y - iris.cy) < inner_r) inner.push_back(e);
    }
    const int p_hi = std::min(cfg.pupil_r_range.max, iris.r - 1);
    if (inner.empty() || p_hi < cfg.pupil_r_range.min) {
        throw Error(ErrorCode::NoBoundaryFound, "no pupil candidates inside the iris");
    }
    const Peak pupil = best_circle(inner, w, h, cfg.pupil_r_range.min, p_hi, cfg.accumulator_step,
                                   [&](int cx, int cy, int r) {
                                       return std::hypot(cx - iris.cx, cy - iris.cy) + r < iris.r;
                                   });
    if (pupil.support < cfg.min_peak_support) {
        throw Error(ErrorCode::NoBoundaryFound, "pupil accumulator peak too weak");
    }

    Segmentation seg;
    seg.iris = {static_cast<double>(iris.cx), static_cast<double>(iris.cy), static_cast<double>(iris.r)};
    seg.pupil = {static_cast<double>(pupil.cx), static_cast<double>(pupil.cy), static_cast<double>(pupil.r)};
    seg.validate();
    return seg;
}

Segmentation attach_mask(Segmentation seg, const IrisImage& source, const IrisImage& mask_image,
                         std::uint8_t threshold) {
    if (mask_image.width() != source.width() || mask_image.height() != source.height()) {
        throw Error(ErrorCode::DimensionMismatch, "mask is " + std::to_string(mask_image.width()) + "x" +
                                                      std::to_string(mask_image.height()) + ", image is " +
                                                      std::to_string(source.width()) + "x" +
                                                      std::to_string(source.height()));
    }
    Bitmap m(mask_image.height(), mask_image.width());
    auto bits = m.data();
    const auto px = mask_image.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) bits[i] = px[i] >= threshold ? 1 : 0;
    seg.occlusion_mask = std::move(m);
    return seg;
}

Bitmap default_annulus_mask(const Segmentation& seg, int width, int height) {
    Bitmap m(height, width);
    const double ri2 = seg.iris.r * seg.iris.r;
    const double rp2 = seg.pupil.r * seg.pupil.r;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double dxi = x - seg.iris.cx, dyi = y - seg.iris.cy;
            const double dxp = x - seg.pupil.cx, dyp = y - seg.pupil.cy;
            m.set(y, x, dxi * dxi + dyi * dyi <= ri2 && dxp * dxp + dyp * dyp > rp2);
        }
    }
    return m;
}

}  // namespace pmiris
