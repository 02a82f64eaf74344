#include "pmiris/evaluation.hpp"
#include "pmiris/special_functions.hpp"
#include "pmiris/statistics.hpp"

#include "../support/check.hpp"
#include "../support/oracles.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <random>

using namespace pmiris;

namespace {

bool rel_close(double got, double want, double tol) {
    if (want == 0) return std::abs(got) <= tol;
    return std::abs(got - want) <= tol * std::abs(want);
}

SampleMetadata with_pmi(std::string id, double pmi, int age = 40) {
    SampleMetadata m;
    m.sample_id = std::move(id);
    m.subject_id = m.sample_id;
    m.pmi_hours = pmi;
    m.age_years = age;
    return m;
}

std::vector<SampleMetadata> group_of(const std::string& prefix, const std::vector<double>& pmis) {
    std::vector<SampleMetadata> g;
    for (std::size_t i = 0; i < pmis.size(); ++i) g.push_back(with_pmi(prefix + std::to_string(i), pmis[i]));
    return g;
}

}  // namespace

TEST_CASE("incomplete beta matches Boost") {
    for (double a : {0.5, 1.0, 2.5, 10.0, 60.0})
        for (double b : {0.5, 1.0, 3.0, 25.0, 200.0})
            for (double x : {0.0, 1e-6, 0.01, 0.2, 0.5, 0.77, 0.999, 1.0}) {
                const double want = boost::math::ibeta(a, b, x);
                INFO("a=" << a << " b=" << b << " x=" << x);
                CHECK(rel_close(special::incomplete_beta(a, b, x), want, 1e-10));
            }
}

TEST_CASE("incomplete gamma matches Boost") {
    for (double s : {0.5, 1.0, 1.5, 4.0, 12.5, 50.0})
        for (double x : {0.0, 1e-4, 0.3, 1.0, 3.7, 10.0, 40.0, 120.0}) {
            INFO("s=" << s << " x=" << x);
            CHECK(rel_close(special::gamma_p(s, x), boost::math::gamma_p(s, x), 1e-10));
            CHECK(rel_close(special::gamma_q(s, x), boost::math::gamma_q(s, x), 1e-10));
        }
}

TEST_CASE("distribution tails match Boost including tiny p") {
    for (double d1 : {1.0, 2.0, 5.0})
        for (double d2 : {3.0, 27.0, 87.0})
            for (double f : {0.0, 0.4, 1.0, 3.2, 20.0, 400.0}) {
                const double want = boost::math::cdf(boost::math::complement(boost::math::fisher_f(d1, d2), f));
                INFO("d1=" << d1 << " d2=" << d2 << " f=" << f);
                CHECK(rel_close(special::f_survival(f, d1, d2), want, 1e-9));
            }
    for (double k : {1.0, 2.0, 4.0, 9.0})
        for (double x : {0.0, 0.5, 3.0, 15.0, 90.0, 600.0}) {
            const double want = boost::math::cdf(boost::math::complement(boost::math::chi_squared(k), x));
            INFO("k=" << k << " x=" << x);
            CHECK(rel_close(special::chi2_survival(x, k), want, 1e-9));
        }
}

TEST_CASE("special function identities") {
    for (double a = 0.25; a < 30; a *= 1.9)
        for (double b = 0.25; b < 30; b *= 2.3)
            for (double x = 0.0; x <= 1.0; x += 0.05) {
                CHECK(std::abs(special::incomplete_beta(a, b, x) + special::incomplete_beta(b, a, 1 - x) - 1) <= 1e-10);
            }
    for (double s : {0.1, 0.5, 1.0, 7.0}) CHECK(special::gamma_q(s, 0) == 1.0);
    for (double x = 0.0; x < 30; x += 0.37) CHECK(std::abs(special::gamma_q(0.5, x) - std::erfc(std::sqrt(x))) <= 1e-8);
    for (double d : {1.0, 4.0, 30.0}) CHECK(std::abs(special::f_survival(1.0, d, d) - 0.5) <= 1e-12);
}

TEST_CASE("ANOVA examples") {
    const auto same = anova_oneway({{1, 2, 3}, {1, 2, 3}});
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == 1.0);

    const std::vector<std::vector<double>> groups = {{1, 2, 3, 4}, {2, 3, 4, 5}, {3, 4, 5, 6}};
    const auto r = anova_oneway(groups);
    // SSB = 4*(1+0+1) = 8, SSW = 3*5 = 15 -> F = (8/2)/(15/9) = 2.4
    CHECK(std::abs(r.statistic - 2.4) <= 1e-12);
    CHECK(r.df1 == 2);
    CHECK(r.df2 == 9);
    const auto o = oracle::anova_direct(groups);
    CHECK(std::abs(r.statistic - o.f) <= 1e-9);
    const double p = boost::math::cdf(boost::math::complement(boost::math::fisher_f(2, 9), 2.4));
    CHECK(std::abs(r.p_value - p) <= 1e-9);

    const auto tied = anova_oneway({{2, 2}, {2, 2}});
    CHECK(tied.degenerate);
    CHECK(tied.statistic == 0.0);
    CHECK(tied.p_value == 1.0);
    const auto split = anova_oneway({{1, 1}, {5, 5}});
    CHECK(split.degenerate);
    CHECK(std::isinf(split.statistic));
    CHECK(split.p_value == 0.0);

    CHECK_ERROR_CODE(anova_oneway({{1, 2}}), ErrorCode::DegenerateInput);
    CHECK_ERROR_CODE(anova_oneway({{1, 2}, {3}}), ErrorCode::DegenerateInput);
}

TEST_CASE("ANOVA underflow is flagged") {
    std::vector<double> a, b;
    for (int i = 0; i < 200; ++i) {
        a.push_back(i % 7 * 0.01);
        b.push_back(100 + i % 5 * 0.01);
    }
    const auto r = anova_oneway({a, b});
    CHECK(r.p_value == 0.0);
    CHECK(r.p_underflow);
    CHECK_FALSE(r.degenerate);
}

TEST_CASE("ANOVA and Kruskal-Wallis equal direct oracles on random instances") {
    std::mt19937_64 rng(123);
    for (int t = 0; t < 100; ++t) {
        const int k = 2 + static_cast<int>(rng() % 4);
        std::vector<std::vector<double>> groups(static_cast<std::size_t>(k));
        std::uniform_int_distribution<int> q(0, 12);
        for (auto& g : groups) {
            g.resize(2 + rng() % 8);
            for (auto& x : g) x = q(rng) * 0.25 + (rng() % 3 == 0 ? 0.5 : 0.0);
        }
        const auto o = oracle::anova_direct(groups);
        if (o.ssw > 1e-12) {
            const auto r = anova_oneway(groups);
            CHECK(std::abs(r.statistic - o.f) <= 1e-9 * std::max(1.0, o.f));
            const double p = boost::math::cdf(boost::math::complement(boost::math::fisher_f(o.df1, o.df2), o.f));
            CHECK(std::abs(r.p_value - p) <= 1e-9);
        }
        const auto kw = kruskal_wallis(groups);
        const double h = oracle::kruskal_direct(groups);
        CHECK(std::abs(kw.statistic - h) <= 1e-9);
        if (!kw.degenerate) {
            const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(k - 1), h));
            CHECK(std::abs(kw.p_value - p) <= 1e-9);
        }
    }
}

TEST_CASE("ANOVA is invariant to shift and scale") {
    const std::vector<std::vector<double>> g = {{0.3, 1.2, 2.2}, {1.1, 1.9, 2.5, 3.0}, {2.2, 3.1}};
    const double base = anova_oneway(g).statistic;
    auto mapped = g;
    for (auto& grp : mapped)
        for (auto& x : grp) x = 7.5 * x + 1000;
    CHECK(anova_oneway(mapped).statistic == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("Kruskal-Wallis examples and invariance") {
    const auto tied = kruskal_wallis({{3, 3}, {3, 3, 3}});
    CHECK(tied.statistic == 0.0);
    CHECK(tied.p_value == 1.0);
    CHECK(tied.degenerate);

    // ranks 1,2 | 3,4: H = 12/(4*5) * (2*(1.5-2.5)^2 + 2*(3.5-2.5)^2) = 2.4
    const auto r = kruskal_wallis({{1, 2}, {3, 4}});
    CHECK(std::abs(r.statistic - 2.4) <= 1e-12);
    CHECK(std::abs(r.statistic - oracle::kruskal_direct({{1, 2}, {3, 4}})) <= 1e-12);
    CHECK(r.df1 == 1);

    std::vector<double> lo, hi;
    for (int i = 0; i < 40; ++i) {
        lo.push_back(i);
        hi.push_back(100 + i);
    }
    CHECK(kruskal_wallis({lo, hi}).p_value < 1e-6);

    const std::vector<std::vector<double>> g = {{0.3, 1.2, 2.2, 2.2}, {1.1, 1.9, 2.5}, {2.2, 3.1, 0.9}};
    auto mapped = g;
    for (auto& grp : mapped)
        for (auto& x : grp) x = std::exp(2 * x) - 5;
    CHECK(kruskal_wallis(mapped).statistic == kruskal_wallis(g).statistic);
    CHECK_ERROR_CODE(kruskal_wallis({{1, 2}}), ErrorCode::DegenerateInput);
}

TEST_CASE("PMI balancing examples") {
    const auto same = balance_pmi({{"A", group_of("a", {5, 9, 12})}, {"B", group_of("b", {12, 5, 9})}},
                                  BalanceOptions{0.05, 2});
    CHECK(same.removed.empty());
    CHECK(same.groups.at("A").size() == 3u);
    CHECK(same.groups.at("B").size() == 3u);

    const auto r = balance_pmi({{"A", group_of("a", {10, 20})}, {"B", group_of("b", {10, 20, 90})}},
                               BalanceOptions{0.05, 2});
    REQUIRE(r.removed.size() == 1u);
    CHECK(r.removed[0] == std::pair<std::string, std::string>{"B", "b2"});
    CHECK(mean_pmi(r.groups.at("A")) == 15.0);
    CHECK(mean_pmi(r.groups.at("B")) == 15.0);

    std::vector<double> many(100);
    for (std::size_t i = 0; i < many.size(); ++i) many[i] = 50 + static_cast<double>(i);
    CHECK_ERROR_CODE(balance_pmi({{"A", group_of("a", {1})}, {"B", group_of("b", many)}}), ErrorCode::CannotBalance);
    CHECK_ERROR_CODE(balance_pmi({{"A", group_of("a", {1, 2})}}), ErrorCode::InvalidArgument);
}

TEST_CASE("PMI balancing properties on random instances") {
    std::mt19937_64 rng(77);
    int succeeded = 0;
    for (int t = 0; t < 100; ++t) {
        std::uniform_real_distribution<double> u(0, 240);
        std::vector<double> a(6 + rng() % 30), b(6 + rng() % 30);
        for (auto& x : a) x = std::round(u(rng) * 10) / 10;
        for (auto& x : b) x = std::round(u(rng) * 10) / 10 + (rng() % 2 ? 20 : 0);
        const std::map<std::string, std::vector<SampleMetadata>> in = {{"A", group_of("a", a)}, {"B", group_of("b", b)}};
        const double ma = mean_pmi(in.at("A")), mb = mean_pmi(in.at("B"));
        const std::string smaller = ma <= mb ? "A" : "B";
        try {
            const auto r = balance_pmi(in, BalanceOptions{0.05, 2});
            ++succeeded;
            CHECK(std::abs(mean_pmi(r.groups.at("A")) - mean_pmi(r.groups.at("B"))) <= 0.05 + 1e-12);
            for (const auto& [label, id] : r.removed) CHECK(label != smaller);
            CHECK(r.groups.at(smaller).size() == in.at(smaller).size());
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::CannotBalance);
        }
    }
    CHECK(succeeded >= 50);
}

TEST_CASE("age groups use inclusive bounds") {
    std::vector<SampleMetadata> meta;
    for (int age : {0, 1, 33, 34, 66, 67, 99, 100, 130}) meta.push_back(with_pmi("age" + std::to_string(age), 0, age));
    const auto s = split_age_groups(meta);
    auto ids = [](const std::vector<SampleMetadata>& g) {
        std::vector<std::string> out;
        for (const auto& m : g) out.push_back(m.sample_id);
        return out;
    };
    CHECK(ids(s.groups[0]) == std::vector<std::string>{"age1", "age33"});
    CHECK(ids(s.groups[1]) == std::vector<std::string>{"age34", "age66"});
    CHECK(ids(s.groups[2]) == std::vector<std::string>{"age67", "age99"});
    CHECK(s.excluded == std::vector<std::string>{"age0", "age100", "age130"});
}

TEST_CASE("bootstrap d-prime") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g0(0, 1), g3(3, 1);
    std::vector<double> g(10000), im(10000);
    for (auto& x : g) x = g0(rng);
    for (auto& x : im) x = g3(rng);
    const auto v = bootstrap_dprime(g, im, 30, 0.5, 99);
    REQUIRE(v.size() == 30u);
    for (double d : v) CHECK(std::abs(d - 3.0) <= 0.15);
    CHECK(bootstrap_dprime(g, im, 30, 0.5, 99) == v);
    CHECK(bootstrap_dprime(g, im, 30, 0.5, 100) != v);

    const std::vector<double> small_g = {0.1, 0.15, 0.2, 0.3, 0.05}, small_i = {0.4, 0.5, 0.45, 0.55, 0.6, 0.48};
    const double full = dprime(small_g, small_i);
    for (double d : bootstrap_dprime(small_g, small_i, 5, 1.0, 1)) CHECK(d == doctest::Approx(full).epsilon(1e-12));

    CHECK_ERROR_CODE(bootstrap_dprime(std::vector<double>{1, 2, 3}, small_i), ErrorCode::SampleTooSmall);
}
