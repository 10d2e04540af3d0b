#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace sysrisk;
using namespace testing;

TEST_CASE("partition grammar") {
    const auto p = parse_partition("1,3|2,4", 4);
    REQUIRE(p.size() == 2);
    CHECK(p.block(0) == std::vector<int>{0, 2});
    CHECK(p.block(1) == std::vector<int>{1, 3});
    CHECK(parse_partition("4,2|3,1", 4) == p);
    CHECK(p.str() == "1,3|2,4");

    CHECK(code_of([] { parse_partition("1,1|2", 2); }) == Errc::ParseError);
    CHECK(code_of([] { parse_partition("1|2", 3); }) == Errc::ParseError);
    CHECK(code_of([] { parse_partition("1|5", 2); }) == Errc::ParseError);
    CHECK(code_of([] { parse_partition("1,x|2", 2); }) == Errc::ParseError);
    CHECK(code_of([] { parse_partition("1||2", 2); }) == Errc::ParseError);
    CHECK(code_of([] { Partition({{0}, {0, 1}}, 2); }) == Errc::InvalidPartition);
}

TEST_CASE("betas_disjoint") {
    const Market m4 = block_market(4, {}, 0);
    auto b = betas_disjoint(m4, parse_partition("1,3|2,4", 4));
    CHECK(b.group(0) == 2);
    CHECK(b.group(1) == 2);
    CHECK(b.total == 4);

    const Market m2 = validate_market(Vec::Zero(2), Mat::Identity(2, 2), Vec::Constant(2, 2), -1);
    b = betas_disjoint(m2, Partition::single(2));
    CHECK(b.group(0) == 1);
    CHECK(b.total == 1);

    const Market m3 = validate_market(Vec::Zero(3), Mat::Identity(3, 3),
                                      (Vec(3) << 0.4, 1.2, 1.8).finished(), -1);
    b = betas_disjoint(m3, parse_partition("1|2,3", 3));
    CHECK(b.total == doctest::Approx(2.5 + 5.0 / 6 + 5.0 / 9));
}

TEST_CASE("group_constant") {
    const Market m = validate_market(Vec::Zero(2), Mat::Identity(2, 2), Vec::Ones(2), -2);
    CHECK(group_constant(m, Partition::single(2), 0) == doctest::Approx(0.5));

    // deterministic X
    const Vec mu = (Vec(3) << 0.3, -1, 2).finished();
    const Vec alpha = (Vec(3) << 1, 2, 0.5).finished();
    const Market det = validate_market(mu, Mat::Zero(3, 3), alpha, -1.5);
    const auto p = parse_partition("1,3|2", 3);
    const double beta = 1 + 0.5 + 2;
    CHECK(group_constant(det, p, 0) == doctest::Approx(3 * std::log(beta / 1.5) - 2.3));
    CHECK(group_constant(det, p, 1) == doctest::Approx(0.5 * std::log(beta / 1.5) + 1));
}

TEST_CASE("group_constant against Monte Carlo") {
    std::mt19937_64 g(3);
    const Market m = random_market(g, 4);
    const auto p = parse_partition("1,2|3,4", 4);
    const auto b = betas_disjoint(m, p);
    const Mat X = sample_X(m, 1000000, 9);
    for (int k = 0; k < 2; ++k) {
        const Vec S = X.transpose() * p.indicator(k);
        const auto e = mean_estimate((-S / b.group(k)).array().exp().matrix());
        // delta method through bm log(-(beta/B) E)
        const Estimate d{b.group(k) * std::log(-(b.total / m.budget) * e.value), b.group(k) * e.se / e.value};
        CHECK(within_se(d, group_constant(m, p, k)));
    }
}

TEST_CASE("allocation_disjoint closed forms") {
    const Market m = validate_market(Vec::Zero(2), Mat::Identity(2, 2), Vec::Ones(2), -1);
    const auto r = allocation_disjoint(m, Partition::single(2));
    CHECK(r.rho(0) == doctest::Approx(std::log(2.0) + 0.25));
    CHECK(r.rho(0) == doctest::Approx(0.943147).epsilon(1e-6));

    const Vec mu = (Vec(4) << 1, 2, 3, 4).finished();
    const Market det = validate_market(mu, Mat::Zero(4, 4), Vec::Constant(4, 2), -3);
    for (const char* s : {"1,2,3,4", "1|2|3|4", "1,3|2,4", "1,2,4|3"}) {
        const auto rr = allocation_disjoint(det, parse_partition(s, 4));
        for (int i = 0; i < 4; ++i) CHECK(rr.rho(i) == doctest::Approx(0.5 * std::log(4 / (2 * 3.0)) - mu(i)));
    }
}

TEST_CASE("allocation_disjoint against the tilted expectation of Y") {
    std::mt19937_64 g(4);
    const Market m = random_market(g, 4);
    const auto p = parse_partition("1,3|2,4", 4);
    const auto r = allocation_disjoint(m, p);
    const Mat X = sample_X(m, 1000000, 10);
    Mat Y(4, X.cols());
    for (Eigen::Index s = 0; s < X.cols(); ++s) Y.col(s) = sample_optimal_Y(m, p, X.col(s));
    for (int k = 0; k < 4; ++k) {
        const int blk = p.block_of(k);
        const auto e = tilted_estimate(X, p.indicator(blk), r.beta_m(blk), Vec(Y.row(k).transpose()));
        CHECK(within_se(e, r.rho(k)));
    }
}

TEST_CASE("sample_optimal_Y keeps block sums deterministic") {
    std::mt19937_64 g(5);
    const Market m = random_market(g, 5);
    const auto p = parse_partition("1,4|2,3,5", 5);
    const auto r = allocation_disjoint(m, p);
    const Mat X = sample_X(m, 100, 1);
    for (int s = 0; s < 100; ++s) {
        const Vec y = sample_optimal_Y(m, p, X.col(s));
        for (int k = 0; k < p.size(); ++k) CHECK(std::abs(p.indicator(k).dot(y) - r.d(k)) < 1e-10);
    }
    // mean draw, single block, common alpha
    const Market iid = validate_market(m.mu, m.sigma, Vec::Constant(5, 1.3), m.budget);
    const auto one = Partition::single(5);
    const Vec y = sample_optimal_Y(iid, one, iid.mu);
    const double beta = 5 / 1.3;
    for (int i = 0; i < 5; ++i)
        CHECK(y(i) == doctest::Approx(-iid.mu(i) + (iid.mu.sum() + group_constant(iid, one, 0)) / (1.3 * beta)));
}

TEST_CASE("budget feasibility") {
    std::mt19937_64 g(6);
    const Market m = random_market(g, 4);
    const Mat X = sample_X(m, 1000000, 12);
    for (const char* s : {"1,2,3,4", "1,3|2,4", "1|2|3,4"})
        CHECK(within_se(budget_check(m, parse_partition(s, 4), X), m.budget));
}

TEST_CASE("eta") {
    const Market m = validate_market(Vec::Zero(3), Mat::Identity(3, 3), (Vec(3) << 0.7, 1, 1).finished(), -1);
    const auto p = parse_partition("1|2,3", 3);
    CHECK(eta(m, p, 0) == doctest::Approx(0.35));
    CHECK(eta(m, p, 1) == doctest::Approx(0.25));

    for (double a2 : {1.2, 1.5, 3.0}) {
        const Market m2 = validate_market(Vec::Zero(3), Mat::Identity(3, 3), (Vec(3) << 0.7, 1, a2).finished(), -1);
        CHECK(eta(m2, p, 2) > eta(m2, p, 1));
    }
}

TEST_CASE("lemma_not_nash") {
    const Vec a1 = (Vec(10) << 2, 2, 3, 3, 3, 4, 4, 4, 4, 5).finished();
    const Market m1 = validate_market(Vec::Zero(10), Mat::Identity(10, 10), a1, -1);
    const auto r1 = lemma_not_nash(m1, parse_partition("1,2|3,4,5|6,7,8,9,10", 10));
    CHECK(r1.verdict == LemmaVerdict::not_nash_strict);

    // 4/3 = 1 + 1/3 exactly, with eta strictly larger at the head of heads
    const Vec a2 = (Vec(6) << 2, 2, 4, 3, 3, 3).finished();
    const Market m2 = validate_market(Vec::Zero(6), Mat::Identity(6, 6), a2, -1);
    const auto p2 = parse_partition("1,2,3|4,5,6", 6);
    CHECK(lemma_not_nash(m2, p2).verdict == LemmaVerdict::not_nash_strict);
    CHECK_FALSE(is_nash_disjoint(m2, p2));

    // ratio above the bound
    const Vec a3 = (Vec(4) << 1, 5, 1, 1).finished();
    const Market m3 = validate_market(Vec::Zero(4), Mat::Identity(4, 4), a3, -1);
    CHECK(lemma_not_nash(m3, parse_partition("1,2|3,4", 4)).verdict == LemmaVerdict::inconclusive);

    CHECK(code_of([&] { lemma_not_nash(m1, Partition::single(10)); }) == Errc::SingleBlock);
}

TEST_CASE("property: allocation sum, mean invariance, trivial dominance, eta order") {
    std::mt19937_64 g(7);
    for (int r = 0; r < 200; ++r) {
        const int n = 2 + r % 5;
        const Market m = random_market(g, n);
        const auto p = random_partition(g, n);
        const auto q = random_partition(g, n);
        const auto rp = allocation_disjoint(m, p);
        CHECK(rp.rho.sum() == doctest::Approx(rp.d.sum()).epsilon(1e-9));
        CHECK(rp.total == doctest::Approx(rp.d.sum()).epsilon(1e-12));

        Market shifted = m;
        for (int i = 0; i < n; ++i) shifted.mu(i) = unif(g, -5, 5);
        const auto rq = allocation_disjoint(m, q);
        const auto sp = allocation_disjoint(shifted, p), sq = allocation_disjoint(shifted, q);
        for (int k = 0; k < n; ++k)
            CHECK(rp.rho(k) - rq.rho(k) == doctest::Approx(sp.rho(k) - sq.rho(k)).epsilon(1e-9).scale(10));

        const double single = allocation_disjoint(m, Partition::single(n)).total;
        CHECK(single <= rp.total + 1e-9 * std::max(1.0, std::abs(rp.total)));

        for (int b = 0; b < p.size(); ++b)
            for (int k : p.block(b))
                for (int l : p.block(b))
                    if (m.alpha(k) < m.alpha(l)) CHECK(eta(m, p, k) < eta(m, p, l));
    }
}

TEST_CASE("property: lemma verdicts are sound") {
    std::mt19937_64 g(8);
    int strict = 0;
    for (int r = 0; r < 300; ++r) {
        const int n = 3 + r % 4;
        Vec alpha(n);
        for (int i = 0; i < n; ++i) alpha(i) = unif(g, 0.5, 3);
        const Market m = validate_market(Vec::Zero(n), Mat::Identity(n, n), alpha, -1);
        const auto p = random_partition(g, n);
        if (p.size() < 2) continue;
        if (lemma_not_nash(m, p).verdict == LemmaVerdict::not_nash_strict) {
            ++strict;
            CHECK_FALSE(is_nash_disjoint(m, p));
        }
    }
    CHECK(strict > 20);
}
