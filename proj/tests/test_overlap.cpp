#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace sysrisk;
using namespace testing;

namespace {

Mat rows2(std::initializer_list<double> first) {
    Mat w(first.size(), 2);
    int i = 0;
    for (double v : first) {
        w(i, 0) = v;
        w(i, 1) = 1 - v;
        ++i;
    }
    return w;
}

Vec member_col(const WeightMatrix& w, int j) {
    Vec c = Vec::Zero(w.n());
    for (int i = 0; i < w.n(); ++i)
        if (w.member(i, j)) c(i) = w(i, j);
    return c;
}

} // namespace

TEST_CASE("weight matrix validation") {
    CHECK(code_of([] { WeightMatrix(rows2({0.5, 0.2}) * 1.1); }) == Errc::InvalidWeights);
    Mat neg = rows2({1.2, 0.5});
    CHECK(code_of([&] { WeightMatrix{neg}; }) == Errc::InvalidWeights);

    Mat tiny = rows2({1e-12, 0.5});
    const WeightMatrix w(tiny);
    CHECK(w(0, 0) == 0.0);
    CHECK(w(0, 1) == 1.0);
    CHECK_FALSE(w.member(0, 0));

    const WeightMatrix c = WeightMatrix(rows2({0.2, 0.9, 0.4})).canonical();
    CHECK(c(0, 0) == doctest::Approx(0.8));
    CHECK(c(1, 0) == doctest::Approx(0.1));
}

TEST_CASE("betas_overlap") {
    const Market m = validate_market(Vec::Zero(3), Mat::Identity(3, 3), (Vec(3) << 1, 2, 4).finished(), -1);
    auto b = betas_overlap(m, rows2({1, 1, 1}));
    CHECK(b.group(0) == doctest::Approx(1.75));
    CHECK(b.group(1) == 0);
    CHECK(b.total == doctest::Approx(1.75));

    const Market m2 = validate_market(Vec::Zero(2), Mat::Identity(2, 2), Vec::Ones(2), -1);
    b = betas_overlap(m2, rows2({0.5, 0.5}));
    CHECK(b.group(0) == 2);
    CHECK(b.group(1) == 2);
    CHECK(b.total == 4);
    b = betas_overlap(m2, rows2({0.5, 1}));
    CHECK(b.group(0) == 2);
    CHECK(b.group(1) == 1);
    CHECK(b.total == 3);
}

TEST_CASE("disjoint reduction") {
    std::mt19937_64 g(1);
    for (int r = 0; r < 100; ++r) {
        const int n = 2 + r % 6;
        const Market m = random_market(g, n);
        const auto p = random_partition(g, n);
        const auto d = allocation_disjoint(m, p);
        const auto o = allocation_overlap(m, WeightMatrix::from_partition(p, p.size() + 1));
        for (int k = 0; k < n; ++k) CHECK(std::abs(o.rho(k) - d.rho(k)) <= 1e-12 * std::max(1.0, std::abs(d.rho(k))));
        for (int k = 0; k < p.size(); ++k) CHECK(std::abs(o.d(k) - d.d(k)) <= 1e-12 * std::max(1.0, std::abs(d.d(k))));
        CHECK(o.d(p.size()) == 0);
        CHECK(o.total == doctest::Approx(d.total).epsilon(1e-12));
    }
}

TEST_CASE("all rows in the first group equal the single block") {
    std::mt19937_64 g(2);
    const Market m = random_market(g, 5);
    const auto o = allocation_overlap(m, WeightMatrix(rows2({1, 1, 1, 1, 1})));
    const auto d = allocation_disjoint(m, Partition::single(5));
    for (int k = 0; k < 5; ++k) CHECK(o.rho(k) == doctest::Approx(d.rho(k)).epsilon(1e-12));
}

TEST_CASE("total identity") {
    std::mt19937_64 g(3);
    for (int r = 0; r < 200; ++r) {
        const int n = 2 + r % 6;
        const Market m = random_market(g, n);
        const auto w = random_weight_matrix(g, n, 2 + r % 3);
        const auto o = allocation_overlap(m, w);
        CHECK(o.rho.sum() == doctest::Approx(o.d.sum()).epsilon(1e-9));
        for (int i = 0; i < n; ++i) CHECK(o.rho(i) == doctest::Approx(o.rho_ij.row(i).sum()).epsilon(1e-12));
        CHECK(bank_risk(m, w.w(), 0) == doctest::Approx(o.rho(0)).epsilon(1e-12));
    }
}

TEST_CASE("allocation_overlap against Monte Carlo") {
    std::mt19937_64 g(4);
    const Market m = random_market(g, 4);
    const WeightMatrix w(rows2({0.3, 1, 0.6, 0}));
    const auto o = allocation_overlap(m, w);
    const Mat X = sample_X(m, 1000000, 5);
    for (int j = 0; j < 2; ++j) {
        const Vec a = member_col(w, j);
        const double S_cols = X.cols();
        Mat Yj(4, static_cast<int>(S_cols));
        for (Eigen::Index s = 0; s < X.cols(); ++s) Yj.col(s) = sample_optimal_Y(m, w, X.col(s)).col(j);
        for (int i = 0; i < 4; ++i) {
            if (!w.member(i, j)) continue;
            CHECK(within_se(tilted_estimate(X, a, o.beta_j(j), Vec(Yj.row(i).transpose())), o.rho_ij(i, j)));
        }
    }
    CHECK(within_se(budget_check(m, w, X), m.budget));
}

TEST_CASE("tilt preserves covariances") {
    std::mt19937_64 g(5);
    const Market m = random_market(g, 3);
    const Vec a = (Vec(3) << 0.4, 1, 0.7).finished();
    const double bj = 1.7;
    const auto t = tilted_moments(m, a, bj);
    const Vec mean_q = t.xi / t.z0;
    const Mat X = sample_X(m, 1000000, 6);
    const Vec S = X.transpose() * a;
    const double mS = a.dot(mean_q);
    for (int i = 0; i < 3; ++i) {
        const Vec xi = X.row(i).transpose().array() - mean_q(i);
        CHECK(within_se(tilted_estimate(X, a, bj, Vec(xi.cwiseAbs2())), m.sigma(i, i)));
        CHECK(within_se(tilted_estimate(X, a, bj, Vec(xi.cwiseProduct((S.array() - mS).matrix()))),
                        (m.sigma * a)(i)));
    }
}

TEST_CASE("sensitivities: special shocks") {
    std::mt19937_64 g(6);
    const Market m = random_market(g, 4);
    const WeightMatrix w(rows2({0.3, 1, 0.6, 0.5}));
    const Vec z = (Vec(4) << 0.2, -1, 0.4, 2).finished();
    const Shock det = Shock::fixed(z);
    const auto rep = allocation_overlap(m, w);
    for (int j = 0; j < 2; ++j) {
        CHECK(marginal_group_risk(m, w, j, det) == doctest::Approx(-member_col(w, j).dot(z)));
        for (int i = 0; i < 4; ++i) {
            if (!w.member(i, j)) continue;
            CHECK(local_causal_responsibility(m, w, i, j, det) == doctest::Approx(-w(i, j) * z(i)));
            CHECK(marginal_risk_allocation(m, w, i, j, det) == doctest::Approx(-w(i, j) * z(i)));
        }
    }

    // independent of X with zero mean
    const Shock indep = Shock::gaussian(Vec::Zero(4), Mat::Identity(4, 4), Mat::Zero(4, 4));
    CHECK(marginal_group_risk(m, w, 0, indep) == doctest::Approx(0).scale(1));

    // Z = X
    const Shock id = Shock::identity(m);
    for (int j = 0; j < 2; ++j) {
        const auto gs = group_stats(m, member_col(w, j));
        CHECK(marginal_group_risk(m, w, j, id) ==
              doctest::Approx(-(gs.mu_s - gs.var_s / rep.beta_j(j))));
    }

    // shock on bank 4 only: bank 1's local term vanishes
    Mat cross = Mat::Zero(4, 4);
    cross.col(3) = m.sigma.col(3);
    Mat cov = Mat::Zero(4, 4);
    cov(3, 3) = m.sigma(3, 3);
    const Shock ek = Shock::gaussian((Vec(4) << 0, 0, 0, m.mu(3)).finished(), cov, cross);
    CHECK(local_causal_responsibility(m, w, 0, 0, ek) == doctest::Approx(0).scale(1));
    // two-term form: only the covariance terms survive
    const double bj = rep.beta_j(0);
    const double two = (w(0, 0) / bj) * w(3, 0) * m.sigma(0, 3) -
                       (1 / (m.alpha(0) * bj * bj)) * w(3, 0) * (m.sigma * member_col(w, 0))(3);
    CHECK(marginal_risk_allocation(m, w, 0, 0, ek) == doctest::Approx(two));

    CHECK(code_of([&] { local_causal_responsibility(m, WeightMatrix(rows2({1, 1, 1, 1})), 0, 1, det); }) ==
          Errc::NotMember);
    CHECK(code_of([&] { weight_sensitivity(m, WeightMatrix(rows2({1, 1, 1, 1})), 0, 1); }) == Errc::ZeroWeight);
}

TEST_CASE("weight sensitivity: deterministic bank") {
    Mat s = Mat::Identity(3, 3);
    s(0, 0) = 0;
    const Vec mu = (Vec(3) << 1.5, 0, 0).finished();
    const Market m = validate_market(mu, s, Vec::Ones(3), -1);
    const WeightMatrix w(rows2({0.4, 0.5, 0.5}));
    CHECK(weight_sensitivity(m, w, 0, 0) == doctest::Approx(-1.5));
}

TEST_CASE("sensitivities match central finite differences") {
    std::mt19937_64 g(7);
    const double h = 1e-5;
    for (int r = 0; r < 50; ++r) {
        const int n = 3 + r % 4;
        const Market m = random_market(g, n);
        const auto w = random_weight_matrix(g, n, 2);
        const auto rep = allocation_overlap(m, w);

        // jointly Gaussian shock: Z = C X + independent noise
        Mat C(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) C(a, b) = unif(g, -0.5, 0.5);
        Vec zm(n);
        for (int a = 0; a < n; ++a) zm(a) = unif(g, -1, 1);
        const Mat zcov = C * m.sigma * C.transpose() + 0.1 * Mat::Identity(n, n);
        const Shock z = r % 3 == 0 ? Shock::identity(m) : Shock::gaussian(zm, zcov, m.sigma * C.transpose());

        for (int j = 0; j < 2; ++j) {
            if (rep.beta_j(j) <= 0) continue;
            const Vec a = member_col(w, j);
            const double bj = rep.beta_j(j);
            const double dd = fd([&](double e) { return group_constant_entry(perturbed_market(m, z, e), a, bj, rep.beta); }, h);
            CHECK(std::abs(dd - marginal_group_risk(m, w, j, z)) < 1e-6);

            double sum = 0;
            for (int i = 0; i < n; ++i) {
                if (!w.member(i, j)) continue;
                const double mra = marginal_risk_allocation(m, w, i, j, z);
                sum += mra;
                const double f1 = fd([&](double e) { return allocation_entry(perturbed_market(m, z, e), a, i, bj, rep.beta); }, h);
                CHECK(std::abs(f1 - mra) < 1e-6);

                // tilt frozen at eps = 0: E_Q[Y_{X + eps Z}] with Y linear in (X, Z, d)
                const double mq_i = m.mu(i) - (m.sigma * a)(i) / bj;
                const double zq_i = z.mean(i) - (z.cross.transpose() * a)(i) / bj;
                const double mq_s = a.dot(m.mu) - a.dot(m.sigma * a) / bj;
                const double zq_s = a.dot(z.mean) - a.dot(z.cross.transpose() * a) / bj;
                const double f2 = fd([&](double e) {
                    const double d = group_constant_entry(perturbed_market(m, z, e), a, bj, rep.beta);
                    return -w(i, j) * (mq_i + e * zq_i) + (mq_s + e * zq_s + d) / (m.alpha(i) * bj);
                }, h);
                CHECK(std::abs(f2 - local_causal_responsibility(m, w, i, j, z)) < 1e-6);

                const double f3 = fd([&](double dw) {
                    Vec c = a;
                    c(i) += dw;
                    return allocation_entry(m, c, i, bj, rep.beta);
                }, h);
                CHECK(std::abs(f3 - weight_sensitivity(m, w, i, j)) < 1e-6);
            }
            CHECK(sum == doctest::Approx(marginal_group_risk(m, w, j, z)).epsilon(1e-9).scale(1));
        }
    }
}

TEST_CASE("monotonicity") {
    std::mt19937_64 g(8);
    // full-mass split: both sides coincide
    {
        const Market m = random_market(g, 4);
        const WeightMatrix w(rows2({0.3, 1, 0.6, 0}));
        const auto r = monotonicity_check(m, w, 0, member_col(w, 0));
        CHECK(r.holds);
        CHECK(r.right == doctest::Approx(r.left).epsilon(1e-10));
        CHECK(r.d_m2 == 0);
    }
    // disjoint specialisation: a block split into two sub-blocks
    for (int t = 0; t < 50; ++t) {
        const int n = 3 + t % 4;
        const Market m = random_market(g, n);
        const WeightMatrix w = WeightMatrix::from_partition(Partition::single(n), 2);
        Vec split = Vec::Zero(n);
        for (int k = 0; k < n; ++k) split(k) = unif(g, 0, 1) < 0.5 ? 1.0 : 0.0;
        if (split.sum() == 0) split(0) = 1;
        const auto r = monotonicity_check(m, w, 0, split);
        CHECK(r.subadditive);
        CHECK(r.holds);
    }
    // random partial splits, means shifted positive
    MarketShape pos;
    pos.mu_lo = 1;
    pos.mu_hi = 4;
    for (int t = 0; t < 100; ++t) {
        const int n = 3 + t % 4;
        const Market m = random_market(g, n, pos);
        const auto w = random_weight_matrix(g, n, 2);
        const int j = t % 2;
        Vec split = Vec::Zero(n);
        bool any = false;
        for (int k = 0; k < n; ++k)
            if (w.member(k, j)) {
                split(k) = w(k, j) * unif(g, 0.05, 1);
                any = true;
            }
        if (!any) continue;
        const auto r = monotonicity_check(m, w, j, split);
        CHECK(r.holds);
    }

    const Market m = random_market(g, 3);
    const WeightMatrix w(rows2({0.3, 1, 0}));
    CHECK(code_of([&] { monotonicity_check(m, w, 0, (Vec(3) << 0.5, 0, 0).finished()); }) == Errc::InvalidSplit);
    CHECK(code_of([&] { monotonicity_check(m, w, 0, (Vec(3) << 0, 0, 0.5).finished()); }) == Errc::InvalidSplit);
    CHECK(code_of([&] { monotonicity_check(m, w, 0, Vec::Zero(3)); }) == Errc::InvalidSplit);
}
