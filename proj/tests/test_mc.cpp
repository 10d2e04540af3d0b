#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "sysrisk/app.hpp"

using namespace sysrisk;
using namespace testing;

TEST_CASE("sample_X basics") {
    const Vec mu = (Vec(3) << 1, -2, 0.5).finished();
    const Market zero = validate_market(mu, Mat::Zero(3, 3), Vec::Ones(3), -1);
    const Mat X0 = sample_X(zero, 1000, 1);
    for (Eigen::Index s = 0; s < X0.cols(); ++s) CHECK(X0.col(s) == mu);

    const Market id = validate_market(Vec::Zero(3), Mat::Identity(3, 3), Vec::Ones(3), -1);
    const int N = 400000;
    const Mat X = sample_X(id, N, 2);
    const Mat cov = X * X.transpose() / N;
    CHECK((cov - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 5 * std::sqrt(2.0 / N));

    CHECK(sample_X(id, 20000, 3) == sample_X(id, 20000, 3));
    CHECK(sample_X(id, 20000, 3) != sample_X(id, 20000, 4));
    // a prefix of a longer run is the same stream
    CHECK(sample_X(id, 10000, 5) == sample_X(id, 30000, 5).leftCols(10000));

    // rank-deficient covariance goes through the eigen route
    Mat s(2, 2);
    s << 1, 1, 1, 1;
    const Market sing = validate_market(Vec::Zero(2), s, Vec::Ones(2), -1);
    const Mat Xs = sample_X(sing, 1000, 6);
    CHECK((Xs.row(0) - Xs.row(1)).cwiseAbs().maxCoeff() < 1e-12);

    const auto ind = app::build_market(app::example_config("4.2"));
    CHECK(code_of([&] { sample_X(ind, 10, 1); }) == Errc::NotPSD);
}

TEST_CASE("tilted_estimate") {
    std::mt19937_64 g(1);
    const Market m = random_market(g, 4);
    const Mat X = sample_X(m, 1000000, 7);
    const Vec a = (Vec(4) << 1, 1, 0, 0.5).finished();
    const double beta = 1.8;

    const auto one = tilted_estimate(X, a, beta, Vec(Vec::Ones(X.cols())));
    CHECK(one.value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(one.se == doctest::Approx(0).scale(1e-12));

    const Vec sa = m.sigma * a;
    for (int i = 0; i < 4; ++i) {
        const auto e = tilted_estimate(X, a, beta, [&](const Vec& x) { return x(i); });
        CHECK(within_se(e, m.mu(i) - sa(i) / beta));
    }

    // the normalised weights average to one
    const Vec S = X.transpose() * a;
    const Vec w = (-S / beta).array().exp().matrix();
    const auto t = tilted_moments(m, a, beta);
    CHECK(within_se(mean_estimate(w / t.z0), 1.0));

    // a tiny beta puts all the mass on a handful of draws
    const Mat Xs = sample_X(validate_market(Vec::Zero(2), 100 * Mat::Identity(2, 2), Vec::Ones(2), -1), 20000, 1);
    CHECK(code_of([&] { tilted_estimate(Xs, Vec::Ones(2), 0.05, Vec(Vec::Ones(20000))); }) ==
          Errc::DegenerateWeights);
}

TEST_CASE("budget_check") {
    const Market m = validate_market(Vec::Zero(2), Mat::Identity(2, 2), Vec::Ones(2), -2);
    const Mat X = sample_X(m, 1000000, 8);
    const auto e = budget_check(m, Partition::single(2), X);
    CHECK(within_se(e, -2));

    // the negative control moves the estimate far outside the band
    const auto bad = budget_check(m, Partition::single(2), X, 0.1);
    CHECK_FALSE(within_se(bad, -2));
    CHECK(bad.value == doctest::Approx(-2 * std::exp(-0.1 / 2)).epsilon(1e-3));

    // zero variance: exact, with zero standard error
    const Market det = validate_market(Vec::Ones(3), Mat::Zero(3, 3), Vec::Constant(3, 0.7), -1.3);
    const Mat Xd = sample_X(det, 100, 1);
    const auto ed = budget_check(det, parse_partition("1,2|3", 3), Xd);
    CHECK(ed.se == 0);
    CHECK(ed.value == doctest::Approx(-1.3).epsilon(1e-12));
}

TEST_CASE("budget at an overlapping equilibrium") {
    const auto cfg = app::example_config("4.4");
    const auto m = app::build_market(cfg);
    const auto r = fictitious_play_overlap(m, app::initial_weights(cfg, 2, 1), 1);
    REQUIRE(r.converged);
    const Mat X = sample_X(m, 1000000, 2);
    CHECK(within_se(budget_check(m, r.weights, X), -8));
    CHECK_FALSE(within_se(budget_check(m, r.weights, X, 0.1), -8));
}

TEST_CASE("trivial-Nash condition on B") {
    const Market close = validate_market(Vec::Zero(4), Mat::Identity(4, 4), Vec::Ones(4), -1e-8);
    CHECK(trivial_nash_B_bound(close).overall);
    const Market far = validate_market(Vec::Zero(4), Mat::Identity(4, 4), Vec::Ones(4), -1e6);
    CHECK_FALSE(trivial_nash_B_bound(far).overall);

    Mat c = Mat::Identity(3, 3);
    c(0, 1) = c(1, 0) = 0.2;
    CHECK(code_of([&] { trivial_nash_B_bound(validate_market(Vec::Zero(3), c, Vec::Ones(3), -1)); }) ==
          Errc::NotIID);

    // bisection on log(-B) for the predicate flip, per bank
    const Vec alpha = (Vec(4) << 0.5, 1, 1.5, 3).finished();
    const Mat sig = 0.8 * Mat::Identity(4, 4);
    auto holds = [&](double logb, int i) -> bool {
        return trivial_nash_B_bound(validate_market(Vec::Zero(4), sig, alpha, -std::exp(logb))).per_bank[i];
    };
    const auto ref = trivial_nash_B_bound(validate_market(Vec::Zero(4), sig, alpha, -1));
    for (int i = 0; i < 4; ++i) {
        double lo = -30, hi = 30;
        REQUIRE(holds(lo, i));
        REQUIRE_FALSE(holds(hi, i));
        for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
            const double mid = 0.5 * (lo + hi);
            (holds(mid, i) ? lo : hi) = mid;
        }
        CHECK(std::abs(-std::exp(lo) - ref.critical_B(i)) <= 1e-9 * std::max(1.0, std::abs(ref.critical_B(i))));
    }
}

TEST_CASE("trivial-Nash condition implies the single group is a best response") {
    for (double sig : {0.3, 1.0, 2.0})
        for (double B : {-1e-4, -0.05, -0.5, -1.0, -5.0, -50.0}) {
            const Market m = validate_market(Vec::Zero(4), sig * Mat::Identity(4, 4), (Vec(4) << 0.6, 1, 1.4, 2).finished(), B);
            const auto t = trivial_nash_B_bound(m);
            const WeightMatrix single(Mat((Mat(4, 2) << 1, 0, 1, 0, 1, 0, 1, 0).finished()));
            if (t.overall) CHECK(is_nash_overlap(m, single));
        }
}
