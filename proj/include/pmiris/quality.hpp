#pragma once

#include "pmiris/types.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pmiris {

enum class QualityMetric {
    usable_iris_area,
    iris_sclera_contrast,
    gray_scale_utilization,
    iris_radius,
    pupil_iris_ratio,
    iris_pupil_concentricity,
    sharpness,
};

inline constexpr std::array<QualityMetric, 7> kAllQualityMetrics = {
    QualityMetric::usable_iris_area,       QualityMetric::iris_sclera_contrast, QualityMetric::gray_scale_utilization,
    QualityMetric::iris_radius,            QualityMetric::pupil_iris_ratio,     QualityMetric::iris_pupil_concentricity,
    QualityMetric::sharpness,
};

/// Upper-case key, e.g. "USABLE_IRIS_AREA".
std::string metric_key(QualityMetric m);
QualityMetric parse_metric(const std::string& key);
std::optional<double> metric_value(const QualityRecord& q, QualityMetric m);

struct QualityConfig {
    double sharpness_constant = 1800.0;
};

/// Iris-pixel metrics are absent when no usable annulus pixel exists.
QualityRecord compute_quality(const IrisImage& img, const Segmentation& seg, const QualityConfig& cfg = {});

/// ((f1 + f2) / 2, f1 - f2). Throws MetricAbsent.
std::pair<double, double> pair_features(const QualityRecord& f1, const QualityRecord& f2, QualityMetric metric);

struct DensityGrid {
    int nx = 0;
    int ny = 0;
    double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
    std::vector<double> density;  // row-major [iy * nx + ix], sums to 1

    double at(int ix, int iy) const { return density[static_cast<std::size_t>(iy) * nx + ix]; }
};

/// 2D histogram of (avg, diff) over uniform bins spanning the data range. Throws EmptyInput.
DensityGrid quality_heatmap_bins(const std::vector<std::pair<double, double>>& pairs, int nx, int ny);

}  // namespace pmiris
