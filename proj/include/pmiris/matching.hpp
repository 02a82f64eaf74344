#pragma once

#include "pmiris/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace pmiris {

inline constexpr double kDefaultOverlapFloor = 0.10;

struct MatchResult {
    double score = 1.0;
    int best_shift = 0;  // template columns
    std::int64_t overlap_bits = 0;
    /// Index i holds shift i - max_shift; empty where overlap fell below the floor.
    std::vector<std::optional<double>> per_shift_scores;
};

/// Templates compare only with equal encoder, digest, dimensions and plane count.
bool compatible(const IrisTemplate& a, const IrisTemplate& b);

/// Minimum over shifts s in [-max_shift, max_shift] of the masked fractional
/// Hamming distance between a and b rotated right by s columns
/// (b_s[c] = b[c - s]). Ties go to the smallest |s|, then the negative shift.
/// Shifts whose joint mask covers less than overlap_floor of the grid are
/// skipped; if all are, throws InsufficientOverlap.
MatchResult fractional_hamming(const IrisTemplate& a, const IrisTemplate& b, int max_shift,
                               double overlap_floor = kDefaultOverlapFloor);

/// Per-cell agreement over the joint mask, smoothed with a 5x5 box (circular
/// in angle, truncated in radius) over present cells only.
struct Heatmap {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;  // meaningful only where present
    Bitmap present;

    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
    double mean() const;
};

inline constexpr int kHeatmapWindow = 5;

Heatmap similarity_heatmap(const IrisTemplate& a, const IrisTemplate& b, int shift);

/// 8-bit rendering: value * 255 where present, 0 elsewhere.
std::vector<std::uint8_t> heatmap_gray(const Heatmap& h);

}  // namespace pmiris
