#pragma once

#include "pmiris/metadata.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace pmiris {

struct TestResult {
    double statistic = 0;  // F or H
    double p_value = 1;
    double df1 = 0;
    double df2 = 0;        // unused (0) for Kruskal-Wallis
    bool p_underflow = false;  // true p below 1e-300, reported as 0
    bool degenerate = false;   // zero within-group variance or all values tied
};

inline constexpr double kPValueFloor = 1e-300;

/// One-way ANOVA with F-distribution p-value. Zero within-group variance with
/// distinct group means gives F = inf, p = 0, degenerate = true; all values
/// equal gives F = 0, p = 1, degenerate = true. Throws DegenerateInput for
/// fewer than two groups or a group with fewer than two values.
TestResult anova_oneway(const std::vector<std::vector<double>>& groups);

/// Kruskal-Wallis H with mid-ranks and tie correction; chi-squared p-value
/// with k - 1 df. All values tied gives H = 0, p = 1, degenerate = true.
TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

struct BalanceOptions {
    double tolerance_hours = 0.05;
    std::size_t min_size = 5;
};

struct BalanceResult {
    std::map<std::string, std::vector<SampleMetadata>> groups;
    /// (group label, sample_id) in removal order.
    std::vector<std::pair<std::string, std::string>> removed;
};

double mean_pmi(const std::vector<SampleMetadata>& group);

/// Repeatedly drops one sample from the group with the largest mean PMI,
/// choosing the removal that brings its mean closest to the smallest group
/// mean without undershooting it by more than the tolerance. Ties go to the
/// smaller sample_id. Groups are sorted by (pmi_hours, sample_id) first.
/// Throws CannotBalance when a removal would go below min_size or no
/// admissible removal exists; InvalidArgument for fewer than two non-empty groups.
BalanceResult balance_pmi(const std::map<std::string, std::vector<SampleMetadata>>& groups,
                          const BalanceOptions& opts = {});

struct AgeSplit {
    std::array<std::vector<SampleMetadata>, 3> groups;  // 1-33, 34-66, 67-99
    std::vector<std::string> excluded;                  // sample ids outside 1..99
};

AgeSplit split_age_groups(const std::vector<SampleMetadata>& meta);

/// reps d' values, each over ceil(frac * n) scores drawn without replacement
/// from each set. Rep i uses a generator seeded with seed + i.
/// Throws SampleTooSmall when either set has fewer than 4 scores.
std::vector<double> bootstrap_dprime(std::span<const double> genuine, std::span<const double> impostor,
                                     int reps = 30, double frac = 0.5, std::uint64_t seed = 0);

}  // namespace pmiris
