#include "sysrisk/best_response.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace sysrisk {

namespace {

BestResponseCoefficients raw_coefficients(const Market& m, const Mat& w, int i) {
    BestResponseCoefficients c;
    const int n = m.n();
    const double a = m.alpha(i);
    c.alpha_i = a;
    double o1 = 0, o2 = 0;
    for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        if (w(k, 0) > kMemberTol) o1 += 1.0 / m.alpha(k);
        if (w(k, 1) > kMemberTol) o2 += 1.0 / m.alpha(k);
    }
    c.beta1 = o1 + 1.0 / a;
    c.beta2 = o2 + 1.0 / a;
    c.beta = o1 + o2 + 1.0 / a;
    c.beta_prime = c.beta + 1.0 / a;
    const double b1 = c.beta1, b2 = c.beta2;
    for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        const double w1 = w(k, 0) > kMemberTol ? w(k, 0) : 0.0;
        const double w2 = w(k, 1) > kMemberTol ? w(k, 1) : 0.0;
        const double s = m.sigma(k, i);
        c.A += (w1 / (b1 * b1 * a) - w2 / (b2 * b2 * a)) * s - (w1 / b1 - w2 / b2) * s;
        c.abs_cross += std::abs(s);
        for (int l = 0; l < n; ++l) {
            if (l == i) continue;
            const double v1 = w(l, 0) > kMemberTol ? w(l, 0) : 0.0;
            const double v2 = w(l, 1) > kMemberTol ? w(l, 1) : 0.0;
            c.q1 += w1 * v1 * m.sigma(k, l);
            c.q2 += w2 * v2 * m.sigma(k, l);
        }
    }
    const double sii = m.sigma(i, i);
    c.B1 = (2 / b1 - 1 / (b1 * b1 * a)) * sii;
    c.B2 = (2 / b2 - 1 / (b2 * b2 * a)) * sii;
    c.c1 = 1 / b1 - 1 / (b1 * b1 * a);
    c.c2 = 1 / b2 - 1 / (b2 * b2 * a);
    c.log_gap = 2 / a * std::log(c.beta_prime / -m.budget) - 1 / a * std::log(c.beta / -m.budget);
    return c;
}

void check_two(const Market& m, const Mat& w, int i) {
    if (w.cols() != 2) throw Error(Errc::InvalidWeights, "two-group best response needs h = 2");
    if (w.rows() != m.n()) throw Error(Errc::DimensionMismatch, "weight rows != banks");
    if (i < 0 || i >= m.n()) throw Error(Errc::NotMember, "bank index out of range");
}

} // namespace

BestResponseCoefficients coefficients(const Market& m, const Mat& w, int i) {
    check_two(m, w, i);
    bool has1 = false, has2 = false;
    for (int k = 0; k < m.n(); ++k) {
        if (k == i) continue;
        has1 = has1 || w(k, 0) > kMemberTol;
        has2 = has2 || w(k, 1) > kMemberTol;
    }
    if (!has1 || !has2)
        throw Error(Errc::EmptyCounterparty,
                    "bank " + std::to_string(i + 1) + " has no counterparty in group " +
                        (has1 ? "2" : "1"));
    return raw_coefficients(m, w, i);
}

double interior_w_star(const BestResponseCoefficients& c) { return (c.A + c.B2) / (c.B1 + c.B2); }

bool interior_condition(const BestResponseCoefficients& c) { return -c.B2 < c.A && c.A < c.B1; }

DecisionCondition decision_condition(const BestResponseCoefficients& c) {
    const double den = 2 * (c.B1 + c.B2);
    const double a = c.alpha_i;
    DecisionCondition d;
    d.gap_first = c.log_gap - (c.A - c.B1) * (c.A - c.B1) / den -
                  c.q2 / (2 * c.beta2 * c.beta2 * a);
    d.gap_second = c.log_gap - (c.A + c.B2) * (c.A + c.B2) / den -
                   c.q1 / (2 * c.beta1 * c.beta1 * a);
    d.beats_first = d.gap_first < 0;
    d.beats_second = d.gap_second < 0;
    return d;
}

bool sufficient_interior_condition(const Market& m, const Mat& w, int i) {
    const auto c = coefficients(m, w, i);
    // |w_k2 c2 - w_k1 c1| <= max(c1, c2) since w_k1 + w_k2 = 1
    const double lhs = std::max(c.c1, c.c2) * c.abs_cross;
    return lhs < std::min(c.B1, c.B2);
}

namespace {

double risk_at(const Market& m, Mat& w, int i, const Vec& row) {
    const Vec keep = w.row(i);
    w.row(i) = row;
    const double r = bank_risk(m, w, i);
    w.row(i) = keep;
    return r;
}

bool better(double cand, double cur) {
    return cand < cur - 1e-12 * std::max(1.0, std::abs(cur));
}

} // namespace

BestResponse best_response_two_groups(const Market& m, const Mat& w0, int i) {
    check_two(m, w0, i);
    Mat w = w0;
    const Vec cur = w.row(i);
    BestResponse best{cur, risk_at(m, w, i, cur), false};
    best.interior = cur(0) > kMemberTol && cur(1) > kMemberTol;

    auto consider = [&](const Vec& row, bool interior) {
        const double r = risk_at(m, w, i, row);
        if (better(r, best.risk)) best = {row, r, interior};
    };
    consider(Vec::Unit(2, 0), false);
    consider(Vec::Unit(2, 1), false);

    // with i in both groups the risk is a quadratic in w with curvature B1 + B2;
    // the same algebra also covers a group without other members
    const auto c = raw_coefficients(m, w, i);
    if (c.B1 + c.B2 > 0) {
        // w* outside (0,1) still leaves the infimum of the quadratic at an end
        // of the open interval, which can beat the boundary row because the
        // memberships differ; the smallest admissible stake stands in for it
        const double ws = std::clamp(interior_w_star(c), kSplitFloor, 1 - kSplitFloor);
        Vec row(2);
        row << ws, 1 - ws;
        consider(row, true);
    }
    return best;
}

BestResponse best_response_grid(const Market& m, const Mat& w0, int i, int steps) {
    if (steps < 1) throw Error(Errc::InvalidWeights, "grid steps must be >= 1");
    if (w0.rows() != m.n()) throw Error(Errc::DimensionMismatch, "weight rows != banks");
    Mat w = w0;
    const int h = static_cast<int>(w.cols());
    const Vec cur = w.row(i);
    BestResponse best{cur, risk_at(m, w, i, cur), false};
    Vec row(h);
    std::function<void(int, int)> rec = [&](int j, int left) {
        if (j == h - 1) {
            row(j) = static_cast<double>(left) / steps;
            const double r = risk_at(m, w, i, row);
            if (better(r, best.risk)) best = {row, r, false};
            return;
        }
        for (int k = left; k >= 0; --k) {
            row(j) = static_cast<double>(k) / steps;
            rec(j + 1, left - k);
        }
    };
    rec(0, steps);
    int nz = 0;
    for (int j = 0; j < h; ++j) nz += best.row(j) > kMemberTol;
    best.interior = nz > 1;
    return best;
}

} // namespace sysrisk
