#pragma once

#include "pmiris/metadata.hpp"

#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pmiris {

struct SamplePair {
    std::size_t probe;  // indices into the metadata list
    std::size_t gallery;
};

struct PairSets {
    std::vector<SamplePair> genuine;
    std::vector<SamplePair> impostor;
};

/// All unordered pairs split by identity class (subject_id, eye). Within a
/// pair the lexicographically smaller sample_id is the probe; each list is
/// sorted by (probe_id, gallery_id).
PairSets generate_pairs(const std::vector<SampleMetadata>& meta);

/// |mu_i - mu_g| / sqrt((var_g + var_i) / 2) with n-1 variances.
/// Throws EmptyInput or DegenerateVariance.
double dprime(std::span<const double> genuine, std::span<const double> impostor);

struct RocPoint {
    double threshold;
    double fmr;   // impostors accepted
    double fnmr;  // genuines rejected
};

struct RocMetrics {
    double eer = 0;
    double auc = 0;
    std::vector<RocPoint> points;  // from reject-all to accept-all
};

/// Threshold sweep over pooled unique scores. With lower_is_genuine a score
/// s is accepted at threshold t iff s <= t (>= otherwise). EER interpolates
/// linearly where FMR - FNMR changes sign; AUC is the rank statistic with ties
/// counted one half.
RocMetrics roc_metrics(std::span<const double> genuine, std::span<const double> impostor, bool lower_is_genuine = true);

/// Trapezoidal area under (FMR, 1 - FNMR).
double trapezoid_auc(const std::vector<RocPoint>& points);

double ftm_rate(const std::vector<ComparisonRecord>& records);

inline constexpr double kNoPmiBound = std::numeric_limits<double>::infinity();
inline constexpr double kCanonicalPmiBounds[] = {24.0, 72.0, 240.0, kNoPmiBound};

std::vector<ComparisonRecord> pmi_slice(const std::vector<ComparisonRecord>& records, double max_pmi_hours);
std::string pmi_slice_label(double max_pmi_hours);

struct Histogram {
    double lo = 0;
    double hi = 1;
    std::vector<double> genuine;  // density-normalized
    std::vector<double> impostor;
};

inline constexpr int kHistogramBins = 100;

Histogram score_histogram(std::span<const double> genuine, std::span<const double> impostor,
                          int bins = kHistogramBins, double lo = 0.0, double hi = 1.0);

struct EvaluationSummary {
    std::optional<double> d_prime;
    std::optional<double> eer;
    std::optional<double> auc;
    double ftm_rate = 0;
    std::size_t n_genuine = 0;
    std::size_t n_impostor = 0;
    std::size_t n_ftm = 0;
    Histogram histogram;
};

/// Metrics over non-FTM records; FTM pairs are only counted. Metrics that
/// cannot be computed (an empty side, zero variance) are left absent.
EvaluationSummary summarize(const std::vector<ComparisonRecord>& records);

struct PadLevel {
    double apcer = 0;
    double true_detection_rate = 0;  // 1 - BPCER
    double threshold = 0;
    /// apcer * n_attack < 1: the attack set cannot resolve this level.
    bool below_resolution = false;
};

struct PadSummary {
    double auc = 0;
    std::vector<PadLevel> levels;
    Histogram histogram;
};

inline constexpr double kDefaultApcerLevels[] = {0.0001, 0.01};

/// Higher scores are more attack-like; a presentation is called an attack iff
/// score >= t. For each APCER level the largest candidate threshold with
/// APCER(t) = frac(attack < t) <= level is used, reporting frac(bona fide < t).
PadSummary pad_metrics(std::span<const double> bona_fide, std::span<const double> attack,
                       std::span<const double> levels);

}  // namespace pmiris
