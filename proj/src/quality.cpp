#include "pmiris/quality.hpp"

#include "pmiris/error.hpp"
#include "pmiris/segmentation.hpp"

#include <algorithm>
#include <cmath>

namespace pmiris {

namespace {

double median(std::vector<int>& v) {
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

}  // namespace

std::string metric_key(QualityMetric m) {
    switch (m) {
        case QualityMetric::usable_iris_area: return "USABLE_IRIS_AREA";
        case QualityMetric::iris_sclera_contrast: return "IRIS_SCLERA_CONTRAST";
        case QualityMetric::gray_scale_utilization: return "GRAY_SCALE_UTILIZATION";
        case QualityMetric::iris_radius: return "IRIS_RADIUS";
        case QualityMetric::pupil_iris_ratio: return "PUPIL_IRIS_RATIO";
        case QualityMetric::iris_pupil_concentricity: return "IRIS_PUPIL_CONCENTRICITY";
        case QualityMetric::sharpness: return "SHARPNESS";
    }
    return {};
}

QualityMetric parse_metric(const std::string& key) {
    for (auto m : kAllQualityMetrics) {
        if (metric_key(m) == key) return m;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown quality metric '" + key + "'");
}

std::optional<double> metric_value(const QualityRecord& q, QualityMetric m) {
    switch (m) {
        case QualityMetric::usable_iris_area: return q.usable_iris_area;
        case QualityMetric::iris_sclera_contrast: return q.iris_sclera_contrast;
        case QualityMetric::gray_scale_utilization: return q.gray_scale_utilization;
        case QualityMetric::iris_radius: return q.iris_radius;
        case QualityMetric::pupil_iris_ratio: return q.pupil_iris_ratio;
        case QualityMetric::iris_pupil_concentricity: return q.iris_pupil_concentricity;
        case QualityMetric::sharpness: return q.sharpness;
    }
    return std::nullopt;
}

QualityRecord compute_quality(const IrisImage& img, const Segmentation& seg, const QualityConfig& cfg) {
    seg.validate();
    if (seg.occlusion_mask && (seg.occlusion_mask->cols() != img.width() || seg.occlusion_mask->rows() != img.height())) {
        throw Error(ErrorCode::DimensionMismatch, "occlusion mask does not match the image");
    }
    const int w = img.width(), h = img.height();
    QualityRecord q;
    q.iris_radius = seg.iris.r;
    q.pupil_iris_ratio = seg.pupil.r / seg.iris.r;
    q.iris_pupil_concentricity =
        std::clamp(1.0 - std::hypot(seg.pupil.cx - seg.iris.cx, seg.pupil.cy - seg.iris.cy) / seg.iris.r, 0.0, 1.0);

    const Bitmap annulus = default_annulus_mask(seg, w, h);
    auto usable = [&](int x, int y) {
        return annulus.at(y, x) && (!seg.occlusion_mask || seg.occlusion_mask->at(y, x));
    };

    std::size_t annulus_px = 0, usable_px = 0;
    std::array<std::size_t, 256> hist{};
    std::vector<int> iris_band, sclera_band;
    const double ri = seg.iris.r;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double d = std::hypot(x - seg.iris.cx, y - seg.iris.cy);
            const bool occluded = seg.occlusion_mask && !seg.occlusion_mask->at(y, x);
            if (annulus.at(y, x)) {
                ++annulus_px;
                if (!occluded) {
                    ++usable_px;
                    ++hist[img.at(x, y)];
                    if (d >= 0.8 * ri && d < ri) iris_band.push_back(img.at(x, y));
                }
            } else if (d >= 1.05 * ri && d <= 1.25 * ri && !occluded) {
                sclera_band.push_back(img.at(x, y));
            }
        }
    }
    if (annulus_px > 0) q.usable_iris_area = 100.0 * static_cast<double>(usable_px) / static_cast<double>(annulus_px);
    if (usable_px == 0) return q;

    double entropy = 0;
    for (auto c : hist) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(usable_px);
        entropy -= p * std::log2(p);
    }
    q.gray_scale_utilization = std::max(0.0, entropy);

    if (!iris_band.empty() && !sclera_band.empty()) {
        const double mi = median(iris_band), ms = median(sclera_band);
        q.iris_sclera_contrast = ms + mi > 0 ? std::clamp(100.0 * (ms - mi) / (ms + mi), 0.0, 100.0) : 0.0;
    }

    // variance of the 4-neighbour Laplacian over usable pixels with a full neighbourhood
    double sum = 0, sum2 = 0;
    std::size_t n = 0;
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            if (!usable(x, y)) continue;
            const double lap = img.at(x - 1, y) + img.at(x + 1, y) + img.at(x, y - 1) + img.at(x, y + 1) - 4.0 * img.at(x, y);
            sum += lap;
            sum2 += lap * lap;
            ++n;
        }
    }
    if (n > 1) {
        const double mean = sum / static_cast<double>(n);
        const double var = std::max(0.0, (sum2 - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1));
        q.sharpness = 100.0 * var / (var + cfg.sharpness_constant);
    }
    return q;
}

std::pair<double, double> pair_features(const QualityRecord& f1, const QualityRecord& f2, QualityMetric metric) {
    const auto a = metric_value(f1, metric), b = metric_value(f2, metric);
    if (!a || !b) throw Error(ErrorCode::MetricAbsent, metric_key(metric));
    return {(*a + *b) / 2.0, *a - *b};
}

DensityGrid quality_heatmap_bins(const std::vector<std::pair<double, double>>& pairs, int nx, int ny) {
    if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "no quality pairs");
    if (nx < 1 || ny < 1) throw Error(ErrorCode::InvalidArgument, "bin counts must be >= 1");
    DensityGrid g;
    g.nx = nx;
    g.ny = ny;
    g.x_min = g.x_max = pairs.front().first;
    g.y_min = g.y_max = pairs.front().second;
    for (const auto& [x, y] : pairs) {
        g.x_min = std::min(g.x_min, x);
        g.x_max = std::max(g.x_max, x);
        g.y_min = std::min(g.y_min, y);
        g.y_max = std::max(g.y_max, y);
    }
    g.density.assign(static_cast<std::size_t>(nx) * ny, 0.0);
    auto bin = [](double v, double lo, double hi, int n) {
        if (hi <= lo) return 0;
        return std::clamp(static_cast<int>(std::floor((v - lo) / (hi - lo) * n)), 0, n - 1);
    };
    const double unit = 1.0 / static_cast<double>(pairs.size());
    for (const auto& [x, y] : pairs) {
        g.density[static_cast<std::size_t>(bin(y, g.y_min, g.y_max, ny)) * nx + bin(x, g.x_min, g.x_max, nx)] += unit;
    }
    return g;
}

}  // namespace pmiris
