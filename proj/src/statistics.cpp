#include "pmiris/statistics.hpp"

#include "pmiris/error.hpp"
#include "pmiris/evaluation.hpp"
#include "pmiris/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace pmiris {

namespace {

TestResult finish(TestResult r, double p) {
    if (p < kPValueFloor) {
        r.p_value = 0.0;
        r.p_underflow = true;
    } else {
        r.p_value = std::clamp(p, 0.0, 1.0);
    }
    return r;
}

}  // namespace

TestResult anova_oneway(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw Error(ErrorCode::DegenerateInput, "ANOVA needs at least two groups");
    std::size_t n_total = 0;
    double grand = 0;
    for (const auto& g : groups) {
        if (g.size() < 2) throw Error(ErrorCode::DegenerateInput, "every ANOVA group needs at least two values");
        n_total += g.size();
        grand += std::accumulate(g.begin(), g.end(), 0.0);
    }
    grand /= static_cast<double>(n_total);

    double ss_between = 0, ss_within = 0;
    for (const auto& g : groups) {
        const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
        ss_between += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
        for (double x : g) ss_within += (x - mean) * (x - mean);
    }
    TestResult r;
    r.df1 = static_cast<double>(groups.size() - 1);
    r.df2 = static_cast<double>(n_total - groups.size());
    if (ss_within == 0) {
        r.degenerate = true;
        if (ss_between == 0) {
            r.statistic = 0;
            r.p_value = 1;
        } else {
            r.statistic = std::numeric_limits<double>::infinity();
            r.p_value = 0;
        }
        return r;
    }
    r.statistic = (ss_between / r.df1) / (ss_within / r.df2);
    return finish(r, special::f_survival(r.statistic, r.df1, r.df2));
}

TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw Error(ErrorCode::DegenerateInput, "Kruskal-Wallis needs at least two groups");
    std::vector<std::pair<double, std::size_t>> pooled;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        if (groups[gi].empty()) throw Error(ErrorCode::DegenerateInput, "Kruskal-Wallis groups must be non-empty");
        for (double x : groups[gi]) pooled.emplace_back(x, gi);
    }
    std::sort(pooled.begin(), pooled.end());
    const double n = static_cast<double>(pooled.size());

    std::vector<double> rank_sum(groups.size(), 0.0);
    double tie_term = 0;
    for (std::size_t i = 0; i < pooled.size();) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
        const double mid = 0.5 * static_cast<double>(i + 1 + j);
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        for (std::size_t k = i; k < j; ++k) rank_sum[pooled[k].second] += mid;
        i = j;
    }

    TestResult r;
    r.df1 = static_cast<double>(groups.size() - 1);
    const double correction = 1.0 - tie_term / (n * n * n - n);
    if (correction <= 0) {
        r.degenerate = true;
        r.statistic = 0;
        r.p_value = 1;
        return r;
    }
    double h = 0;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const double ni = static_cast<double>(groups[gi].size());
        const double dev = rank_sum[gi] / ni - (n + 1.0) / 2.0;
        h += ni * dev * dev;
    }
    h *= 12.0 / (n * (n + 1.0));
    r.statistic = h / correction;
    return finish(r, special::chi2_survival(r.statistic, r.df1));
}

double mean_pmi(const std::vector<SampleMetadata>& group) {
    if (group.empty()) return 0.0;
    double s = 0;
    for (const auto& m : group) s += m.pmi_hours;
    return s / static_cast<double>(group.size());
}

BalanceResult balance_pmi(const std::map<std::string, std::vector<SampleMetadata>>& groups,
                          const BalanceOptions& opts) {
    if (groups.size() < 2) throw Error(ErrorCode::InvalidArgument, "balancing needs at least two groups");
    BalanceResult res;
    for (const auto& [label, members] : groups) {
        if (members.empty()) throw Error(ErrorCode::InvalidArgument, "group '" + label + "' is empty");
        auto sorted = members;
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
            return std::tie(a.pmi_hours, a.sample_id) < std::tie(b.pmi_hours, b.sample_id);
        });
        res.groups.emplace(label, std::move(sorted));
    }

    for (;;) {
        std::string hi_label, lo_label;
        double hi_mean = -std::numeric_limits<double>::infinity(), lo_mean = std::numeric_limits<double>::infinity();
        for (const auto& [label, members] : res.groups) {
            const double m = mean_pmi(members);
            if (m > hi_mean) {
                hi_mean = m;
                hi_label = label;
            }
            if (m < lo_mean) {
                lo_mean = m;
                lo_label = label;
            }
        }
        if (hi_mean - lo_mean <= opts.tolerance_hours) return res;

        auto& group = res.groups[hi_label];
        if (group.size() <= opts.min_size || group.size() < 2) {
            throw Error(ErrorCode::CannotBalance, "group '" + hi_label + "' reached the minimum size");
        }
        const double sum = hi_mean * static_cast<double>(group.size());
        const double remaining = static_cast<double>(group.size() - 1);
        std::size_t best = group.size();
        double best_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < group.size(); ++i) {
            const double m = (sum - group[i].pmi_hours) / remaining;
            if (m < lo_mean - opts.tolerance_hours) continue;
            const double gap = std::abs(m - lo_mean);
            if (gap < best_gap || (gap == best_gap && group[i].sample_id < group[best].sample_id)) {
                best_gap = gap;
                best = i;
            }
        }
        if (best == group.size()) {
            throw Error(ErrorCode::CannotBalance, "no removal from '" + hi_label + "' keeps its mean near the target");
        }
        res.removed.emplace_back(hi_label, group[best].sample_id);
        group.erase(group.begin() + static_cast<std::ptrdiff_t>(best));
    }
}

AgeSplit split_age_groups(const std::vector<SampleMetadata>& meta) {
    AgeSplit out;
    for (const auto& m : meta) {
        if (const auto g = age_group_of(m.age_years)) {
            out.groups[static_cast<std::size_t>(*g - 1)].push_back(m);
        } else {
            out.excluded.push_back(m.sample_id);
        }
    }
    return out;
}

std::vector<double> bootstrap_dprime(std::span<const double> genuine, std::span<const double> impostor, int reps,
                                     double frac, std::uint64_t seed) {
    if (genuine.size() < 4 || impostor.size() < 4) {
        throw Error(ErrorCode::SampleTooSmall, "bootstrap needs at least 4 scores per set");
    }
    if (reps < 1) throw Error(ErrorCode::InvalidArgument, "reps must be >= 1");
    if (!(frac > 0 && frac <= 1)) throw Error(ErrorCode::InvalidArgument, "frac must be in (0,1]");

    auto draw = [&](std::span<const double> src, std::mt19937_64& rng) {
        const auto k = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(src.size())));
        std::vector<double> pool(src.begin(), src.end());
        for (std::size_t i = 0; i < k; ++i) {
            // uniform index in [i, n) by rejection, independent of libstdc++ distributions
            const std::uint64_t span = pool.size() - i;
            const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
            std::uint64_t v;
            do v = rng();
            while (v >= limit);
            std::swap(pool[i], pool[i + static_cast<std::size_t>(v % span)]);
        }
        pool.resize(k);
        return pool;
    };

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(reps));
    for (int rep = 0; rep < reps; ++rep) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(rep));
        const auto g = draw(genuine, rng);
        const auto im = draw(impostor, rng);
        out.push_back(dprime(g, im));
    }
    return out;
}

}  // namespace pmiris
