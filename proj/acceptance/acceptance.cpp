#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sysrisk/app.hpp"

using namespace sysrisk;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    int failures = 0;

    // keeps the first few reasons
    void require(bool ok, const std::string& what) {
        if (ok) return;
        pass = false;
        if (++failures <= 3 && !what.empty()) detail += (detail.empty() ? "" : "; ") + what;
    }
};

double unif(std::mt19937_64& g, double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(g);
}

Mat random_corr(std::mt19937_64& g, int n) {
    std::normal_distribution<double> nd;
    Mat L(n, 2);
    for (int i = 0; i < n; ++i) L(i, 0) = nd(g), L(i, 1) = nd(g);
    Mat c = L * L.transpose();
    for (int i = 0; i < n; ++i) c(i, i) += unif(g, 0.2, 1.5);
    const Vec s = c.diagonal().cwiseSqrt().cwiseInverse();
    c = s.asDiagonal() * c * s.asDiagonal();
    c.diagonal().setOnes();
    return c;
}

Market random_market(std::mt19937_64& g, int n, double mu_lo = -1, double mu_hi = 1) {
    Vec mu(n), sd(n), alpha(n);
    for (int i = 0; i < n; ++i) {
        mu(i) = unif(g, mu_lo, mu_hi);
        sd(i) = unif(g, 0.3, 1.5);
        alpha(i) = unif(g, 0.5, 2);
    }
    return validate_market(mu, cov_from_sd_corr(sd, random_corr(g, n)), alpha, unif(g, -5, -0.5));
}

Partition random_partition(std::mt19937_64& g, int n) {
    std::vector<int> lab(n);
    for (int i = 0; i < n; ++i) lab[i] = std::uniform_int_distribution<int>(0, n - 1)(g);
    return Partition::from_labels(lab);
}

WeightMatrix random_weights_mixed(std::mt19937_64& g, int n, int h) {
    Mat w(n, h);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < h; ++j) w(i, j) = unif(g, 0, 1) < 0.3 ? 0.0 : unif(g, 0.05, 1);
        if (w.row(i).sum() == 0) w(i, std::uniform_int_distribution<int>(0, h - 1)(g)) = 1;
        w.row(i) /= w.row(i).sum();
    }
    return WeightMatrix(w);
}

Vec member_col(const WeightMatrix& w, int j) {
    Vec c = Vec::Zero(w.n());
    for (int i = 0; i < w.n(); ++i)
        if (w.member(i, j)) c(i) = w(i, j);
    return c;
}

bool within(const Estimate& e, double exact, double k = 4) {
    return std::abs(e.value - exact) <= k * e.se + 1e-12 * std::max(1.0, std::abs(exact));
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

bool contains(const std::vector<Partition>& v, const Partition& p) {
    return std::find(v.begin(), v.end(), p) != v.end();
}

void enumerate(int n, int i, std::vector<int>& lab, int used, std::vector<Partition>& out) {
    if (i == n) {
        out.push_back(Partition::from_labels(lab));
        return;
    }
    for (int b = 0; b <= used; ++b) {
        lab[i] = b;
        enumerate(n, i + 1, lab, std::max(used, b + 1), out);
    }
}

std::vector<Partition> every_partition(int n) {
    std::vector<Partition> out;
    std::vector<int> lab(n);
    enumerate(n, 0, lab, 0, out);
    return out;
}

Outcome four_bank_thresholds() {
    Outcome o;
    const auto p12 = parse_partition("1,2|3,4", 4), p13 = parse_partition("1,3|2,4", 4);
    const double lo = -3.0 / 13, hi = 3.0 / 8, e = 1e-4;
    o.require(is_nash_disjoint(app::claim4_market(lo - e), p12), "{1,2}|{3,4} below -3/13");
    o.require(!is_nash_disjoint(app::claim4_market(lo + e), p12), "{1,2}|{3,4} above -3/13");
    o.require(!is_nash_disjoint(app::claim4_market(hi - e), p13), "{1,3}|{2,4} below 3/8");
    o.require(is_nash_disjoint(app::claim4_market(hi + e), p13), "{1,3}|{2,4} above 3/8");
    return o;
}

Outcome five_bank_blocks() {
    Outcome o;
    const auto p = parse_partition("1,2|3,4,5", 5), q = parse_partition("1,2,3|4,5", 5);
    o.require(is_nash_disjoint(app::claim5_market(-0.3), p), "{1,2}|{3,4,5} at -0.3");
    o.require(!is_nash_disjoint(app::claim5_market(-0.28), p), "{1,2}|{3,4,5} at -0.28");
    for (double r : {-0.9, -0.5, 0.0, 0.5, 0.9})
        o.require(!is_nash_disjoint(app::claim5_market(r), q), fmt("{1,2,3}|{4,5} Nash at rho=%g", r));
    return o;
}

Outcome example41() {
    Outcome o;
    const auto bf = brute_force_nash_disjoint(app::build_market(app::example_config("4.1")));
    o.require(bf.size() == 2 && contains(bf, Partition::single(4)) && contains(bf, parse_partition("1,3|2,4", 4)),
              fmt("%g equilibria found", static_cast<double>(bf.size())));
    return o;
}

Outcome example42() {
    Outcome o;
    const auto cfg = app::example_config("4.2");
    const auto m = app::build_market(cfg);
    const Mat P = app::printed_matrix("4.2");
    const WeightMatrix w0 = app::initial_weights(cfg, 2, 0);
    int hits = 0;
    for (std::uint64_t s = 1; s <= 100; ++s) {
        const auto r = fictitious_play_overlap(m, w0, s);
        hits += r.converged && distance_up_to_permutation(r.weights.w(), P) <= 0.01;
    }
    o.require(hits >= 90, "");
    o.detail = fmt("%g/100 seeds reach the reference matrix", hits);
    return o;
}

Outcome example_terminal(const std::string& id, bool printed_is_nash) {
    Outcome o;
    const auto cfg = app::example_config(id);
    const auto m = app::build_market(cfg);
    const Mat P = app::printed_matrix(id);
    const auto r = fictitious_play_overlap(m, app::initial_weights(cfg, 2, *cfg.seed), *cfg.seed);
    const double d = distance_up_to_permutation(r.weights.w(), P);
    o.require(r.converged, "no convergence");
    o.require(d <= 0.01, fmt("terminal is %.4f from the reference matrix", d));
    if (printed_is_nash) {
        const double gap = best_response_gaps(m, WeightMatrix(P)).maxCoeff();
        o.require(is_nash_overlap(m, WeightMatrix(P)), fmt("reference matrix not Nash, best-response gap %.4f", gap));
    }
    if (o.pass) o.detail = fmt("distance %.4f", d);
    return o;
}

// closed forms against the sampler at 1e6 draws
Outcome oracle_equivalence() {
    Outcome o;
    std::mt19937_64 g(101);
    int compared = 0;
    for (int t = 0; t < 20; ++t) {
        const int n = 2 + t % 5;
        const Market m = random_market(g, n);
        const Mat X = sample_X(m, 1000000, 1000 + t);
        const auto tag = [&](const char* what, int k) { return "market " + std::to_string(t) + ": " + what + " " + std::to_string(k); };

        const auto p = random_partition(g, n);
        const auto rd = allocation_disjoint(m, p);
        for (int b = 0; b < p.size(); ++b) {
            const Vec a = p.indicator(b);
            const double bm = rd.beta_m(b);
            const Vec S = X.transpose() * a;
            const Vec e = (-S / bm).array().exp().matrix();
            const auto tm = tilted_moments(m, a, bm);
            o.require(within(mean_estimate(e), tm.z0), tag("z0", b));
            o.require(within(mean_estimate(S.cwiseProduct(e)), tm.s1), tag("s1", b));
            for (int i = 0; i < n; ++i)
                o.require(within(mean_estimate(Vec(X.row(i).transpose()).cwiseProduct(e)), tm.xi(i)), tag("xi", i));
            compared += 2 + n;
            for (int k : p.block(b)) {
                const Vec y = (-X.row(k).transpose().array() + (S.array() + rd.d(b)) / (m.alpha(k) * bm)).matrix();
                o.require(within(tilted_estimate(X, a, bm, y), rd.rho(k)), tag("disjoint rho", k));
                ++compared;
            }
        }

        const auto w = random_weights_mixed(g, n, 2 + t % 2);
        const auto ro = allocation_overlap(m, w);
        for (int j = 0; j < w.h(); ++j) {
            if (ro.beta_j(j) <= 0) continue;
            const Vec a = member_col(w, j);
            const Vec S = X.transpose() * a;
            for (int i = 0; i < n; ++i) {
                if (!w.member(i, j)) continue;
                const Vec y = (-w(i, j) * X.row(i).transpose().array() +
                               (S.array() + ro.d(j)) / (m.alpha(i) * ro.beta_j(j))).matrix();
                o.require(within(tilted_estimate(X, a, ro.beta_j(j), y), ro.rho_ij(i, j)), tag("overlap rho", i));
                ++compared;
            }
        }
    }
    if (o.pass) o.detail = fmt("%g comparisons", compared);
    return o;
}

Outcome budget_feasibility() {
    Outcome o;
    std::mt19937_64 g(202);
    for (int t = 0; t < 10; ++t) {
        const int n = 3 + t % 4;
        const Market m = random_market(g, n);
        const WeightMatrix w = t % 2 ? WeightMatrix::from_partition(random_partition(g, n), n)
                                     : random_weights_mixed(g, n, 2 + t % 3);
        const Mat X = sample_X(m, 1000000, 2000 + t);
        o.require(within(budget_check(m, w, X), m.budget), fmt("strategy %g off budget", t));
        o.require(!within(budget_check(m, w, X, 0.1), m.budget), fmt("strategy %g control accepted", t));
    }
    return o;
}

double central(const std::function<double(double)>& f, double h = 1e-5) {
    return (f(h) - f(-h)) / (2 * h);
}

Outcome sensitivity_fd() {
    Outcome o;
    std::mt19937_64 g(303);
    double worst = 0;
    auto near = [&](double a, double b, const std::string& what) {
        worst = std::max(worst, std::abs(a - b));
        o.require(std::abs(a - b) < 1e-6, what);
    };
    for (int t = 0; t < 50; ++t) {
        const int n = 3 + t % 4;
        const Market m = random_market(g, n);
        const auto w = random_weights_mixed(g, n, 2);
        const auto rep = allocation_overlap(m, w);
        Mat C(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) C(a, b) = unif(g, -0.5, 0.5);
        Vec zm(n);
        for (int a = 0; a < n; ++a) zm(a) = unif(g, -1, 1);
        const Shock z = t % 3 == 0 ? Shock::identity(m)
                                   : Shock::gaussian(zm, C * m.sigma * C.transpose() + 0.1 * Mat::Identity(n, n),
                                                     m.sigma * C.transpose());
        const std::string at = "instance " + std::to_string(t);
        for (int j = 0; j < 2; ++j) {
            if (rep.beta_j(j) <= 0) continue;
            const Vec a = member_col(w, j);
            const double bj = rep.beta_j(j);
            near(central([&](double e) { return group_constant_entry(perturbed_market(m, z, e), a, bj, rep.beta); }),
                 marginal_group_risk(m, w, j, z), at + " marginal group risk");
            // the tilt stays at eps = 0 for the causal part
            const double mq_s = a.dot(m.mu) - a.dot(m.sigma * a) / bj;
            const double zq_s = a.dot(z.mean) - a.dot(z.cross.transpose() * a) / bj;
            for (int i = 0; i < n; ++i) {
                if (!w.member(i, j)) continue;
                near(central([&](double e) { return allocation_entry(perturbed_market(m, z, e), a, i, bj, rep.beta); }),
                     marginal_risk_allocation(m, w, i, j, z), at + " marginal risk allocation");
                const double mq_i = m.mu(i) - (m.sigma * a)(i) / bj;
                const double zq_i = z.mean(i) - (z.cross.transpose() * a)(i) / bj;
                near(central([&](double e) {
                         const double d = group_constant_entry(perturbed_market(m, z, e), a, bj, rep.beta);
                         return -w(i, j) * (mq_i + e * zq_i) + (mq_s + e * zq_s + d) / (m.alpha(i) * bj);
                     }),
                     local_causal_responsibility(m, w, i, j, z), at + " local causal responsibility");
                near(central([&](double dw) {
                         Vec c = a;
                         c(i) += dw;
                         return allocation_entry(m, c, i, bj, rep.beta);
                     }),
                     weight_sensitivity(m, w, i, j), at + " weight sensitivity");
            }
        }
    }
    if (o.pass) o.detail = fmt("max abs diff %.2e", worst);
    return o;
}

double risk_at(const Market& m, Mat w, int i, double x) {
    w(i, 0) = x;
    w(i, 1) = 1 - x;
    return bank_risk(m, w, i);
}

Outcome best_response_vs_grid() {
    Outcome o;
    std::mt19937_64 g(404);
    int interior = 0;
    for (int t = 0; t < 1000; ++t) {
        const int n = 3 + t % 4;
        const int i = t % n;
        const Market m = random_market(g, n);
        Mat w = random_weights_mixed(g, n, 2).w();
        w.row((i + 1) % n) << 1, 0;
        w.row((i + 2) % n) << 0, 1;
        const auto br = best_response_two_groups(m, w, i);
        double best = 1e300, arg = -1;
        for (int k = 0; k <= 2000; ++k) {
            const double v = risk_at(m, w, i, k / 2000.0);
            if (v < best) best = v, arg = k / 2000.0;
        }
        const std::string at = "instance " + std::to_string(t);
        o.require(br.risk <= best + 1e-8 * std::max(1.0, std::abs(best)), at + " worse than the grid");
        if (std::abs(br.row(0) - arg) > 1e-3)
            o.require(std::abs(risk_at(m, w, i, arg) - br.risk) < 1e-8, at + " weight off the grid minimiser");

        // predicates against the interior risk sampled on the open segment
        const auto c = coefficients(m, w, i);
        const double ws = interior_w_star(c);
        double ib = 1e300, iarg = -1;
        for (int k = 1; k < 2000; ++k) {
            const double v = risk_at(m, w, i, k / 2000.0);
            if (v < ib) ib = v, iarg = k / 2000.0;
        }
        if (std::abs(ws) > 2e-3 && std::abs(ws - 1) > 2e-3) {
            const bool inside = iarg > 1.5e-3 && iarg < 1 - 1.5e-3;
            o.require(interior_condition(c) == inside, at + " interior predicate");
        }
        if (!interior_condition(c)) continue;
        ++interior;
        const double in = risk_at(m, w, i, ws);
        const double r1 = risk_at(m, w, i, 1), r0 = risk_at(m, w, i, 0);
        const auto dc = decision_condition(c);
        if (std::abs(in - r1) > 1e-10) o.require(dc.beats_first == (in < r1), at + " first-group condition");
        if (std::abs(in - r0) > 1e-10) o.require(dc.beats_second == (in < r0), at + " second-group condition");
    }
    if (o.pass) o.detail = fmt("%g interior instances", interior);
    return o;
}

Outcome structural() {
    Outcome o;
    std::mt19937_64 g(505);
    for (int t = 0; t < 200; ++t) {
        const int n = 2 + t % 5;
        const Market m = random_market(g, n);
        const auto p = random_partition(g, n);
        const auto rd = allocation_disjoint(m, p);
        const std::string at = "instance " + std::to_string(t);
        const double scale = std::max(1.0, std::abs(rd.total));
        o.require(std::abs(rd.rho.sum() - rd.d.sum()) <= 1e-9 * scale, at + " disjoint sum identity");
        o.require(allocation_disjoint(m, Partition::single(n)).total <= rd.total + 1e-9 * scale, at + " dominance");

        const auto ro = allocation_overlap(m, WeightMatrix::from_partition(p, p.size() + 1));
        for (int k = 0; k < n; ++k)
            o.require(std::abs(ro.rho(k) - rd.rho(k)) <= 1e-12 * std::max(1.0, std::abs(rd.rho(k))), at + " reduction");

        const auto w = random_weights_mixed(g, n, 2 + t % 3);
        const auto rw = allocation_overlap(m, w);
        o.require(std::abs(rw.rho.sum() - rw.d.sum()) <= 1e-9 * std::max(1.0, std::abs(rw.total)), at + " overlap sum identity");

        for (int b = 0; b < p.size(); ++b)
            for (int k : p.block(b))
                for (int l : p.block(b))
                    if (m.alpha(k) < m.alpha(l)) o.require(eta(m, p, k) < eta(m, p, l), at + " eta order");
    }

    // lemma verdicts never contradict the exhaustive check
    int strict = 0;
    for (int t = 0; t < 60; ++t) {
        const int n = 3 + t % 3;
        Vec alpha(n);
        for (int i = 0; i < n; ++i) alpha(i) = unif(g, 0.3, 4);
        const Market m = validate_market(Vec::Zero(n), Mat::Identity(n, n), alpha, -1);
        for (const auto& p : every_partition(n)) {
            if (p.size() < 2 || lemma_not_nash(m, p).verdict != LemmaVerdict::not_nash_strict) continue;
            ++strict;
            o.require(!is_nash_disjoint(m, p), "lemma verdict contradicted at " + p.str());
        }
    }
    o.require(strict > 0, "lemma never fired");

    int splits = 0;
    while (splits < 100) {
        const int n = 3 + splits % 4;
        const Market m = random_market(g, n, 1, 4);
        const auto w = random_weights_mixed(g, n, 2);
        const int j = splits % 2;
        Vec split = Vec::Zero(n);
        for (int k = 0; k < n; ++k)
            if (w.member(k, j)) split(k) = w(k, j) * unif(g, 0.05, 1);
        if (split.sum() == 0) continue;
        o.require(monotonicity_check(m, w, j, split).holds, "monotonicity split " + std::to_string(splits));
        ++splits;
    }
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double limit;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "block model thresholds, four banks", 1, four_bank_thresholds},
        {2, "block model, five banks", 1, five_bank_blocks},
        {3, "example 4.1 equilibria", 1, example41},
        {4, "example 4.2 over 100 seeds", 30, example42},
        {5, "example 4.3 terminal matrix", 10, [] { return example_terminal("4.3", false); }},
        {6, "example 4.4 terminal matrix and reference Nash", 10, [] { return example_terminal("4.4", true); }},
        {7, "closed forms against Monte Carlo", 120, oracle_equivalence},
        {8, "budget feasibility", 60, budget_feasibility},
        {9, "sensitivities against finite differences", 30, sensitivity_fd},
        {10, "best response against a 2001-point grid", 60, best_response_vs_grid},
        {11, "structural invariants", 60, structural},
    };
    std::vector<int> only;
    for (int a = 1; a < argc; ++a) only.push_back(std::stoi(argv[a]));

    int failed = 0;
    for (const auto& c : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("threw: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.limit) {
            o.detail += (o.detail.empty() ? "" : "; ") + fmt("over the %gs limit", c.limit);
            o.pass = false;
        }
        failed += !o.pass;
        std::printf("[%s] criterion %2d  %-46s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d failed\n", failed);
    return failed == 0 ? 0 : 1;
}
