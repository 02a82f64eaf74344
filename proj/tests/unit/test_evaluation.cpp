#include "pmiris/evaluation.hpp"

#include "../support/check.hpp"
#include "../support/oracles.hpp"

#include <cmath>
#include <random>
#include <set>

using namespace pmiris;

namespace {

SampleMetadata sample(std::string id, std::string subject, Eye eye = Eye::left, double pmi = 0) {
    SampleMetadata m;
    m.sample_id = std::move(id);
    m.subject_id = std::move(subject);
    m.eye = eye;
    m.pmi_hours = pmi;
    m.age_years = 40;
    return m;
}

std::vector<double> normal_scores(double mean, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(mean, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Counts genuine scores above t and impostor scores at or below t directly.
std::pair<double, double> rates_at(const std::vector<double>& g, const std::vector<double>& im, double t) {
    double fnmr = 0, fmr = 0;
    for (double x : g) fnmr += x > t;
    for (double x : im) fmr += x <= t;
    return {fmr / static_cast<double>(im.size()), fnmr / static_cast<double>(g.size())};
}

double auc_pairwise(const std::vector<double>& g, const std::vector<double>& im) {
    double wins = 0;
    for (double a : g)
        for (double b : im) wins += a < b ? 1.0 : (a == b ? 0.5 : 0.0);
    return wins / (static_cast<double>(g.size()) * static_cast<double>(im.size()));
}

}  // namespace

TEST_CASE("pair generation enumerates classes") {
    const std::vector<SampleMetadata> two_by_two = {sample("a1", "A"), sample("a2", "A"), sample("b1", "B"),
                                                    sample("b2", "B")};
    const auto p = generate_pairs(two_by_two);
    CHECK(p.genuine.size() == 2u);
    CHECK(p.impostor.size() == 4u);

    CHECK(generate_pairs({sample("x", "X")}).genuine.empty());
    CHECK(generate_pairs({sample("x", "X")}).impostor.empty());

    const auto three = generate_pairs({sample("c", "S"), sample("a", "S"), sample("b", "S")});
    CHECK(three.genuine.size() == 3u);
    CHECK(three.impostor.empty());

    // left and right eyes of one subject are different classes
    const auto eyes = generate_pairs({sample("l", "S", Eye::left), sample("r", "S", Eye::right)});
    CHECK(eyes.genuine.empty());
    CHECK(eyes.impostor.size() == 1u);
}

TEST_CASE("pair generation matches brute-force enumeration") {
    std::mt19937_64 rng(2);
    std::vector<SampleMetadata> meta;
    for (int i = 0; i < 40; ++i) {
        meta.push_back(sample("s" + std::to_string(rng() % 1000) + "_" + std::to_string(i),
                              "P" + std::to_string(rng() % 6), rng() % 2 ? Eye::left : Eye::right));
    }
    const auto p = generate_pairs(meta);
    std::set<std::pair<std::string, std::string>> want_g, want_i, got_g, got_i;
    for (std::size_t i = 0; i < meta.size(); ++i)
        for (std::size_t j = 0; j < meta.size(); ++j) {
            if (meta[i].sample_id >= meta[j].sample_id) continue;
            const bool same = meta[i].subject_id == meta[j].subject_id && meta[i].eye == meta[j].eye;
            (same ? want_g : want_i).emplace(meta[i].sample_id, meta[j].sample_id);
        }
    for (auto sp : p.genuine) got_g.emplace(meta[sp.probe].sample_id, meta[sp.gallery].sample_id);
    for (auto sp : p.impostor) got_i.emplace(meta[sp.probe].sample_id, meta[sp.gallery].sample_id);
    CHECK(got_g == want_g);
    CHECK(got_i == want_i);
    CHECK(got_g.size() == p.genuine.size());
    CHECK(got_i.size() == p.impostor.size());
    for (std::size_t k = 1; k < p.impostor.size(); ++k) {
        const auto& a = p.impostor[k - 1];
        const auto& b = p.impostor[k];
        CHECK(std::tie(meta[a.probe].sample_id, meta[a.gallery].sample_id) <
              std::tie(meta[b.probe].sample_id, meta[b.gallery].sample_id));
    }
}

TEST_CASE("d-prime examples") {
    const std::vector<double> s = {0.1, 0.2, 0.4};
    CHECK(dprime(s, s) == 0.0);
    const std::vector<double> g(5, 0.2), im(5, 0.6);
    CHECK_ERROR_CODE(dprime(g, im), ErrorCode::DegenerateVariance);
    CHECK_ERROR_CODE(dprime({}, im), ErrorCode::EmptyInput);

    const auto gn = normal_scores(0, 100000, 11), in = normal_scores(2, 100000, 12);
    CHECK(std::abs(dprime(gn, in) - 2.0) <= 0.05);

    // hand-computed: means 1 and 4, n-1 variances 1 and 1 -> 3
    CHECK(dprime(std::vector<double>{0, 1, 2}, std::vector<double>{3, 4, 5}) == doctest::Approx(3.0));
}

TEST_CASE("d-prime is invariant under affine maps") {
    const auto g = normal_scores(0.2, 500, 1), im = normal_scores(0.9, 700, 2);
    const double base = dprime(g, im);
    for (auto [a, b] : {std::pair{3.0, -1.0}, std::pair{-0.5, 7.0}, std::pair{1e-3, 0.0}}) {
        std::vector<double> g2, i2;
        for (double x : g) g2.push_back(a * x + b);
        for (double x : im) i2.push_back(a * x + b);
        CHECK(dprime(g2, i2) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("ROC examples") {
    const std::vector<double> g = {0.1, 0.2, 0.3}, im = {0.6, 0.7};
    const auto sep = roc_metrics(g, im);
    CHECK(sep.eer == 0.0);
    CHECK(sep.auc == 1.0);

    const auto same = roc_metrics(g, g);
    CHECK(same.auc == 0.5);

    const auto gn = normal_scores(0, 100000, 21), in = normal_scores(2, 100000, 22);
    const auto r = roc_metrics(gn, in);
    CHECK(std::abs(r.eer - phi(-1.0)) <= 0.01);
    CHECK(std::abs(r.auc - phi(std::sqrt(2.0))) <= 0.005);
}

TEST_CASE("ROC points match direct counting and AUC matches pairwise and trapezoid") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 40; ++trial) {
        std::uniform_int_distribution<int> q(0, 30);  // coarse grid forces ties
        std::vector<double> g(5 + rng() % 60), im(5 + rng() % 90);
        for (auto& x : g) x = q(rng) / 30.0 * 0.7;
        for (auto& x : im) x = 0.2 + q(rng) / 30.0 * 0.8;
        const auto r = roc_metrics(g, im);
        CHECK(r.points.front().fmr == 0.0);
        CHECK(r.points.front().fnmr == 1.0);
        CHECK(r.points.back().fmr == 1.0);
        CHECK(r.points.back().fnmr == 0.0);
        for (std::size_t k = 1; k < r.points.size(); ++k) {
            const auto [fmr, fnmr] = rates_at(g, im, r.points[k].threshold);
            CHECK(r.points[k].fmr == fmr);
            CHECK(std::abs(r.points[k].fnmr - fnmr) <= 1e-12);
        }
        CHECK(std::abs(r.auc - auc_pairwise(g, im)) <= 1e-12);
        CHECK(std::abs(r.auc - trapezoid_auc(r.points)) <= 1e-12);

        // EER lies between the bracketing rates
        CHECK(r.eer >= 0.0);
        CHECK(r.eer <= 1.0);
        bool bracketed = false;
        for (std::size_t k = 1; k < r.points.size(); ++k) {
            const auto& a = r.points[k - 1];
            const auto& b = r.points[k];
            if (a.fmr - a.fnmr < 0 && b.fmr - b.fnmr >= 0) {
                CHECK(r.eer >= std::min(a.fmr, b.fmr) - 1e-15);
                CHECK(r.eer <= std::max(a.fmr, b.fmr) + 1e-15);
                bracketed = true;
                break;
            }
        }
        CHECK(bracketed);
    }
}

TEST_CASE("EER interpolates between bracketing points") {
    // thresholds 1..4: (fmr, fnmr) = (0,1) (0,.5) (.5,.5) (.5,0) (1,0)
    const std::vector<double> g = {1, 3}, im = {2, 4};
    const auto r = roc_metrics(g, im);
    CHECK(r.eer == 0.5);
    CHECK(r.auc == 0.75);
}

TEST_CASE("ROC metrics are invariant under strictly monotone maps") {
    const auto g = normal_scores(0.0, 400, 5), im = normal_scores(1.5, 300, 6);
    const auto base = roc_metrics(g, im);
    std::vector<double> g2, i2;
    for (double x : g) g2.push_back(std::exp(3 * x) + 1);
    for (double x : im) i2.push_back(std::exp(3 * x) + 1);
    const auto mapped = roc_metrics(g2, i2);
    CHECK(mapped.eer == base.eer);
    CHECK(mapped.auc == base.auc);

    // decreasing map with flipped orientation
    std::vector<double> g3, i3;
    for (double x : g) g3.push_back(-x * x * x);
    for (double x : im) i3.push_back(-x * x * x);
    const auto flipped = roc_metrics(g3, i3, false);
    CHECK(flipped.eer == base.eer);
    CHECK(flipped.auc == base.auc);
}

TEST_CASE("FTM rate and exclusion from metrics") {
    std::vector<ComparisonRecord> recs(8);
    CHECK(ftm_rate(recs) == 0.0);
    for (int i = 0; i < 2; ++i) recs[static_cast<std::size_t>(i)].ftm = true;
    CHECK(ftm_rate(recs) == 0.25);
    for (auto& r : recs) r.ftm = true;
    CHECK(ftm_rate(recs) == 1.0);
    CHECK_ERROR_CODE(ftm_rate({}), ErrorCode::EmptyInput);

    std::vector<ComparisonRecord> mixed;
    for (int i = 0; i < 6; ++i) {
        ComparisonRecord r;
        r.label = i < 3 ? PairLabel::genuine : PairLabel::impostor;
        r.score = i < 3 ? 0.1 * i : 0.5 + 0.01 * i;
        mixed.push_back(r);
    }
    ComparisonRecord f;
    f.ftm = true;
    f.label = PairLabel::genuine;
    mixed.push_back(f);
    const auto s = summarize(mixed);
    CHECK(s.n_genuine == 3u);
    CHECK(s.n_impostor == 3u);
    CHECK(s.n_ftm == 1u);
    CHECK(s.ftm_rate == doctest::Approx(1.0 / 7.0));
    REQUIRE(s.eer.has_value());
    CHECK(*s.eer == 0.0);
    CHECK(*s.auc == 1.0);
}

TEST_CASE("PMI slices are inclusive and nested") {
    std::vector<ComparisonRecord> recs;
    for (double pmi : {0.0, 10.0, 24.0, 30.0, 72.0, 100.0, 240.0, 500.0}) {
        ComparisonRecord r;
        r.pmi_max_hours = pmi;
        recs.push_back(r);
    }
    CHECK(pmi_slice(recs, kNoPmiBound).size() == recs.size());
    CHECK(pmi_slice(recs, 24).size() == 3u);
    CHECK(pmi_slice(recs, 0).size() == 1u);
    std::size_t prev = 0;
    for (double b : kCanonicalPmiBounds) {
        const auto s = pmi_slice(recs, b);
        CHECK(s.size() >= prev);
        prev = s.size();
    }
    CHECK(pmi_slice_label(24) == "0-24h");
    CHECK(pmi_slice_label(kNoPmiBound) == "all");

    std::vector<ComparisonRecord> two(2);
    two[0].pmi_max_hours = 10;
    two[1].pmi_max_hours = 30;
    CHECK(pmi_slice(two, 24).size() == 1u);
}

TEST_CASE("score histogram is a density") {
    const std::vector<double> g = {0.0, 0.05, 0.5, 1.0}, im = {0.45, 0.46};
    const auto h = score_histogram(g, im, 10);
    double area_g = 0, area_i = 0;
    for (double v : h.genuine) area_g += v * 0.1;
    for (double v : h.impostor) area_i += v * 0.1;
    CHECK(area_g == doctest::Approx(1.0));
    CHECK(area_i == doctest::Approx(1.0));
    CHECK(h.genuine[0] == doctest::Approx(5.0));  // two of four in [0, 0.1)
    CHECK(h.genuine[9] == doctest::Approx(2.5));  // 1.0 lands in the last bin
}

TEST_CASE("PAD metrics examples") {
    const std::vector<double> levels(std::begin(kDefaultApcerLevels), std::end(kDefaultApcerLevels));
    const std::vector<double> bf = {0.1, 0.2, 0.3}, at = {0.8, 0.9};
    const auto sep = pad_metrics(bf, at, levels);
    for (const auto& l : sep.levels) CHECK(l.true_detection_rate == 1.0);
    CHECK(sep.auc == 1.0);
    CHECK(pad_metrics(bf, bf, levels).auc == 0.5);
    CHECK_ERROR_CODE(pad_metrics({}, at, levels), ErrorCode::EmptyInput);
    const std::vector<double> bad = {1.5};
    CHECK_ERROR_CODE(pad_metrics(bf, at, bad), ErrorCode::InvalidArgument);
}

TEST_CASE("PAD metrics equal the exhaustive threshold scan") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> q(0, 50);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<double> bf(10 + rng() % 300), at(10 + rng() % 300);
        for (auto& x : bf) x = q(rng) / 50.0 * 0.7;
        for (auto& x : at) x = 0.3 + q(rng) / 50.0 * 0.7;
        const std::vector<double> levels = {0.0, 0.0001, 0.01, 0.05, 0.2, 0.5, 1.0};
        const auto r = pad_metrics(bf, at, levels);
        REQUIRE(r.levels.size() == levels.size());
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const auto want = oracle::pad_scan(bf, at, levels[k]);
            CHECK(r.levels[k].threshold == want.threshold);
            CHECK(r.levels[k].true_detection_rate == want.tdr);
            CHECK(r.levels[k].below_resolution == (levels[k] * static_cast<double>(at.size()) < 1.0));
        }
        CHECK(std::abs(r.auc - auc_pairwise(bf, at)) <= 1e-12);
    }
}
