#include "pmiris/evaluation.hpp"

#include "pmiris/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pmiris {

namespace {

struct MeanVar {
    double mean;
    double var;
};

MeanVar mean_var(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, v.size() > 1 ? ss / (n - 1) : 0.0};
}

// Mann-Whitney statistic via mid-ranks: P(a < b) + P(a == b) / 2.
double prob_less(std::span<const double> a, std::span<const double> b) {
    std::vector<std::pair<double, int>> pooled;
    pooled.reserve(a.size() + b.size());
    for (double x : a) pooled.emplace_back(x, 0);
    for (double x : b) pooled.emplace_back(x, 1);
    std::sort(pooled.begin(), pooled.end());
    double rank_sum_b = 0;
    for (std::size_t i = 0; i < pooled.size();) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
        const double mid = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) {
            if (pooled[k].second == 1) rank_sum_b += mid;
        }
        i = j;
    }
    const double nb = static_cast<double>(b.size()), na = static_cast<double>(a.size());
    return (rank_sum_b - nb * (nb + 1) / 2.0) / (na * nb);
}

}  // namespace

PairSets generate_pairs(const std::vector<SampleMetadata>& meta) {
    PairSets out;
    for (std::size_t i = 0; i < meta.size(); ++i) {
        for (std::size_t j = i + 1; j < meta.size(); ++j) {
            SamplePair p = meta[i].sample_id <= meta[j].sample_id ? SamplePair{i, j} : SamplePair{j, i};
            (meta[i].same_class(meta[j]) ? out.genuine : out.impostor).push_back(p);
        }
    }
    auto by_ids = [&](const SamplePair& x, const SamplePair& y) {
        return std::tie(meta[x.probe].sample_id, meta[x.gallery].sample_id) <
               std::tie(meta[y.probe].sample_id, meta[y.gallery].sample_id);
    };
    std::sort(out.genuine.begin(), out.genuine.end(), by_ids);
    std::sort(out.impostor.begin(), out.impostor.end(), by_ids);
    return out;
}

double dprime(std::span<const double> genuine, std::span<const double> impostor) {
    if (genuine.empty() || impostor.empty()) throw Error(ErrorCode::EmptyInput, "d' needs both score sets");
    const auto g = mean_var(genuine), i = mean_var(impostor);
    const double pooled = (g.var + i.var) / 2.0;
    if (!(pooled > 0)) throw Error(ErrorCode::DegenerateVariance, "both score sets have zero variance");
    return std::abs(i.mean - g.mean) / std::sqrt(pooled);
}

RocMetrics roc_metrics(std::span<const double> genuine, std::span<const double> impostor, bool lower_is_genuine) {
    if (genuine.empty() || impostor.empty()) throw Error(ErrorCode::EmptyInput, "ROC needs both score sets");
    // Work in "lower is genuine" orientation.
    std::vector<double> g(genuine.begin(), genuine.end()), im(impostor.begin(), impostor.end());
    if (!lower_is_genuine) {
        for (auto& v : g) v = -v;
        for (auto& v : im) v = -v;
    }
    std::sort(g.begin(), g.end());
    std::sort(im.begin(), im.end());
    std::vector<double> thresholds;
    thresholds.reserve(g.size() + im.size());
    std::merge(g.begin(), g.end(), im.begin(), im.end(), std::back_inserter(thresholds));
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    RocMetrics out;
    const double ng = static_cast<double>(g.size()), ni = static_cast<double>(im.size());
    const double sign = lower_is_genuine ? 1.0 : -1.0;
    out.points.push_back({sign * -std::numeric_limits<double>::infinity(), 0.0, 1.0});
    std::size_t gi = 0, ii = 0;
    for (double t : thresholds) {
        while (gi < g.size() && g[gi] <= t) ++gi;
        while (ii < im.size() && im[ii] <= t) ++ii;
        out.points.push_back({sign * t, static_cast<double>(ii) / ni, 1.0 - static_cast<double>(gi) / ng});
    }

    // FMR - FNMR rises from -1 to +1; interpolate at the first sign change.
    out.eer = out.points.back().fmr;
    for (std::size_t k = 1; k < out.points.size(); ++k) {
        const auto& q = out.points[k];
        const double dq = q.fmr - q.fnmr;
        if (dq < 0) continue;
        const auto& p = out.points[k - 1];
        const double dp = p.fmr - p.fnmr;
        if (dq == 0) {
            out.eer = q.fmr;
        } else {
            const double lambda = -dp / (dq - dp);
            out.eer = p.fmr + lambda * (q.fmr - p.fmr);
        }
        break;
    }
    out.auc = prob_less(g, im);
    return out;
}

double trapezoid_auc(const std::vector<RocPoint>& points) {
    double area = 0;
    for (std::size_t k = 1; k < points.size(); ++k) {
        const double dx = points[k].fmr - points[k - 1].fmr;
        area += dx * ((1.0 - points[k].fnmr) + (1.0 - points[k - 1].fnmr)) / 2.0;
    }
    return area;
}

double ftm_rate(const std::vector<ComparisonRecord>& records) {
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "no comparison records");
    const auto n = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.ftm; });
    return static_cast<double>(n) / static_cast<double>(records.size());
}

std::vector<ComparisonRecord> pmi_slice(const std::vector<ComparisonRecord>& records, double max_pmi_hours) {
    std::vector<ComparisonRecord> out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out),
                 [&](const auto& r) { return r.pmi_max_hours <= max_pmi_hours; });
    return out;
}

std::string pmi_slice_label(double max_pmi_hours) {
    if (std::isinf(max_pmi_hours)) return "all";
    return "0-" + format_real(max_pmi_hours) + "h";
}

Histogram score_histogram(std::span<const double> genuine, std::span<const double> impostor, int bins, double lo,
                          double hi) {
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    const double width = (hi - lo) / bins;
    auto fill = [&](std::span<const double> scores, std::vector<double>& out) {
        out.assign(static_cast<std::size_t>(bins), 0.0);
        if (scores.empty()) return;
        for (double s : scores) {
            const int b = std::clamp(static_cast<int>(std::floor((s - lo) / width)), 0, bins - 1);
            out[static_cast<std::size_t>(b)] += 1.0;
        }
        for (auto& v : out) v /= static_cast<double>(scores.size()) * width;
    };
    fill(genuine, h.genuine);
    fill(impostor, h.impostor);
    return h;
}

EvaluationSummary summarize(const std::vector<ComparisonRecord>& records) {
    EvaluationSummary s;
    std::vector<double> g, im;
    for (const auto& r : records) {
        if (r.ftm) {
            ++s.n_ftm;
            continue;
        }
        (r.label == PairLabel::genuine ? g : im).push_back(*r.score);
    }
    s.n_genuine = g.size();
    s.n_impostor = im.size();
    s.ftm_rate = records.empty() ? 0.0 : ftm_rate(records);
    s.histogram = score_histogram(g, im);
    if (!g.empty() && !im.empty()) {
        const auto roc = roc_metrics(g, im, true);
        s.eer = roc.eer;
        s.auc = roc.auc;
        try {
            s.d_prime = dprime(g, im);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateVariance) throw;
        }
    }
    return s;
}

PadSummary pad_metrics(std::span<const double> bona_fide, std::span<const double> attack,
                       std::span<const double> levels) {
    if (bona_fide.empty() || attack.empty()) throw Error(ErrorCode::EmptyInput, "PAD metrics need both score sets");
    std::vector<double> bf(bona_fide.begin(), bona_fide.end()), at(attack.begin(), attack.end());
    std::sort(bf.begin(), bf.end());
    std::sort(at.begin(), at.end());

    // candidate thresholds: every observed score, plus +inf (everything bona fide)
    std::vector<double> cand;
    std::merge(bf.begin(), bf.end(), at.begin(), at.end(), std::back_inserter(cand));
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    cand.push_back(std::numeric_limits<double>::infinity());

    auto frac_below = [](const std::vector<double>& v, double t) {
        return static_cast<double>(std::lower_bound(v.begin(), v.end(), t) - v.begin()) / static_cast<double>(v.size());
    };

    PadSummary out;
    for (double level : levels) {
        if (!(level >= 0 && level <= 1)) throw Error(ErrorCode::InvalidArgument, "APCER level must be in [0,1]");
        // APCER(t) is non-decreasing in t: binary search the last admissible candidate.
        std::size_t lo = 0, hi = cand.size();
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (frac_below(at, cand[mid]) <= level ? lo : hi) = mid;
        }
        PadLevel pl;
        pl.apcer = level;
        pl.threshold = cand[lo];
        pl.true_detection_rate = frac_below(bf, cand[lo]);
        pl.below_resolution = level * static_cast<double>(at.size()) < 1.0;
        out.levels.push_back(pl);
    }
    // attack-like is higher, so bona fide plays the "lower is genuine" role
    out.auc = prob_less(bf, at);
    out.histogram = score_histogram(bf, at);
    return out;
}

}  // namespace pmiris
