#include "sysrisk/overlap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sysrisk {

Mat normalize_rows(Mat w) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            if (w(i, j) <= kMemberTol) w(i, j) = 0.0;
        const double s = w.row(i).sum();
        if (s > 0) w.row(i) /= s;
    }
    return w;
}

WeightMatrix::WeightMatrix(Mat w) {
    if (w.rows() < 1 || w.cols() < 1) throw Error(Errc::InvalidWeights, "empty weight matrix");
    if (!w.allFinite()) throw Error(Errc::InvalidWeights, "non-finite weight");
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            if (w(i, j) < -kMemberTol || w(i, j) > 1 + kMemberTol)
                throw Error(Errc::InvalidWeights,
                            "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                ") outside [0,1]");
        if (std::abs(w.row(i).sum() - 1.0) > 1e-9)
            throw Error(Errc::InvalidWeights, "row " + std::to_string(i + 1) + " does not sum to 1");
    }
    w_ = normalize_rows(std::move(w));
}

WeightMatrix WeightMatrix::from_partition(const Partition& p, int h) {
    if (h < p.size()) throw Error(Errc::InvalidWeights, "more blocks than groups");
    Mat w = Mat::Zero(p.n(), h);
    for (int i = 0; i < p.n(); ++i) w(i, p.block_of(i)) = 1.0;
    return WeightMatrix(w);
}

WeightMatrix WeightMatrix::canonical() const {
    std::vector<int> idx(h());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        for (int i = 0; i < n(); ++i) {
            if (w_(i, a) > w_(i, b)) return true;
            if (w_(i, a) < w_(i, b)) return false;
        }
        return false;
    });
    Mat out(n(), h());
    for (int j = 0; j < h(); ++j) out.col(j) = w_.col(idx[j]);
    WeightMatrix c;
    c.w_ = out;
    return c;
}

Betas betas_overlap(const Market& m, const Mat& w) {
    Betas b{Vec::Zero(w.cols()), 0.0};
    for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            if (w(i, j) > kMemberTol) b.group(j) += 1.0 / m.alpha(i);
    b.total = b.group.sum();
    return b;
}

double allocation_entry(const Market& m, const Vec& col, int i, double beta_j, double beta) {
    const double aS = m.sigma.row(i).dot(col);
    const double var = col.dot(m.sigma * col);
    return std::log(beta / -m.budget) / m.alpha(i) - col(i) * m.mu(i) + col(i) / beta_j * aS -
           var / (2 * beta_j * beta_j * m.alpha(i));
}

double group_constant_entry(const Market& m, const Vec& col, double beta_j, double beta) {
    return beta_j * std::log(beta / -m.budget) - col.dot(m.mu) +
           col.dot(m.sigma * col) / (2 * beta_j);
}

namespace {

Vec member_col(const Mat& w, Eigen::Index j) {
    Vec c = w.col(j);
    for (Eigen::Index i = 0; i < c.size(); ++i)
        if (c(i) <= kMemberTol) c(i) = 0.0;
    return c;
}

} // namespace

OverlapReport allocation_overlap(const Market& m, const WeightMatrix& W) {
    if (W.n() != m.n()) throw Error(Errc::DimensionMismatch, "weight rows != banks");
    const Mat& w = W.w();
    const auto b = betas_overlap(m, w);
    OverlapReport r{Mat::Zero(m.n(), W.h()), Vec::Zero(m.n()), Vec::Zero(W.h()), 0.0, b.group,
                    b.total};
    for (int j = 0; j < W.h(); ++j) {
        if (b.group(j) <= 0) continue;
        const Vec col = member_col(w, j);
        r.d(j) = group_constant_entry(m, col, b.group(j), b.total);
        for (int i = 0; i < m.n(); ++i)
            if (W.member(i, j)) r.rho_ij(i, j) = allocation_entry(m, col, i, b.group(j), b.total);
    }
    r.rho = r.rho_ij.rowwise().sum();
    r.total = r.d.sum();
    return r;
}

double bank_risk(const Market& m, const Mat& w, int i) {
    const auto b = betas_overlap(m, w);
    double r = 0;
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
        if (w(i, j) <= kMemberTol) continue;
        r += allocation_entry(m, member_col(w, j), i, b.group(j), b.total);
    }
    return r;
}

Mat sample_optimal_Y(const Market& m, const WeightMatrix& W, const Vec& x) {
    if (x.size() != m.n()) throw Error(Errc::DimensionMismatch, "sample length");
    const auto r = allocation_overlap(m, W);
    Mat y = Mat::Zero(m.n(), W.h());
    for (int j = 0; j < W.h(); ++j) {
        if (r.beta_j(j) <= 0) continue;
        const double s = member_col(W.w(), j).dot(x);
        for (int i = 0; i < m.n(); ++i)
            if (W.member(i, j))
                y(i, j) = -W(i, j) * x(i) + (s + r.d(j)) / (m.alpha(i) * r.beta_j(j));
    }
    return y;
}

Shock Shock::fixed(Vec z) {
    const auto n = z.size();
    return Shock{std::move(z), Mat::Zero(n, n), Mat::Zero(n, n), true};
}

Shock Shock::gaussian(Vec mean, Mat cov, Mat cross) {
    const auto n = mean.size();
    if (cov.rows() != n || cov.cols() != n || cross.rows() != n || cross.cols() != n)
        throw Error(Errc::DimensionMismatch, "shock dimensions");
    return Shock{std::move(mean), std::move(cov), std::move(cross), false};
}

Shock Shock::identity(const Market& m) { return gaussian(m.mu, m.sigma, m.sigma); }

Market perturbed_market(const Market& m, const Shock& z, double eps) {
    Market p = m;
    p.mu = m.mu + eps * z.mean;
    p.sigma = m.sigma + eps * (z.cross + z.cross.transpose()) + eps * eps * z.cov;
    return p;
}

namespace {

struct GroupCtx {
    Vec col;
    double beta_j;
};

GroupCtx group_ctx(const Market& m, const WeightMatrix& W, int j) {
    if (W.n() != m.n()) throw Error(Errc::DimensionMismatch, "weight rows != banks");
    if (j < 0 || j >= W.h()) throw Error(Errc::NotMember, "group index out of range");
    const auto b = betas_overlap(m, W.w());
    return {member_col(W.w(), j), b.group(j)};
}

void check_shock(const Market& m, const Shock& z) {
    if (z.mean.size() != m.n()) throw Error(Errc::DimensionMismatch, "shock length");
}

void check_member(const WeightMatrix& W, int i, int j) {
    if (i < 0 || i >= W.n() || !W.member(i, j))
        throw Error(Errc::NotMember, "bank " + std::to_string(i + 1) + " not in group " +
                                         std::to_string(j + 1));
}

} // namespace

double marginal_group_risk(const Market& m, const WeightMatrix& W, int j, const Shock& z) {
    check_shock(m, z);
    const auto g = group_ctx(m, W, j);
    if (g.beta_j <= 0) return 0.0;
    // Gaussian tilt shifts the mean of S^Z by -Cov(S^Z, S_j)/beta_j
    const double cov = g.col.dot(z.cross * g.col);
    return -(g.col.dot(z.mean) - cov / g.beta_j);
}

double local_causal_responsibility(const Market& m, const WeightMatrix& W, int i, int j,
                                   const Shock& z) {
    check_shock(m, z);
    check_member(W, i, j);
    const auto g = group_ctx(m, W, j);
    const double cov_zi_s = z.cross.col(i).dot(g.col);
    return -W(i, j) * (z.mean(i) - cov_zi_s / g.beta_j);
}

double marginal_risk_allocation(const Market& m, const WeightMatrix& W, int i, int j,
                                const Shock& z) {
    check_shock(m, z);
    check_member(W, i, j);
    const auto g = group_ctx(m, W, j);
    const double wij = W(i, j);
    const double cov_xi_sz = z.cross.row(i).dot(g.col);
    const double cov_s_sz = g.col.dot(z.cross * g.col);
    return local_causal_responsibility(m, W, i, j, z) + wij / g.beta_j * cov_xi_sz -
           cov_s_sz / (m.alpha(i) * g.beta_j * g.beta_j);
}

double weight_sensitivity(const Market& m, const WeightMatrix& W, int i, int j) {
    if (i < 0 || i >= W.n() || j < 0 || j >= W.h())
        throw Error(Errc::NotMember, "index out of range");
    if (!W.member(i, j))
        throw Error(Errc::ZeroWeight, "w(" + std::to_string(i + 1) + "," +
                                          std::to_string(j + 1) + ") is zero");
    const auto g = group_ctx(m, W, j);
    const double aS = m.sigma.row(i).dot(g.col);
    const double qmean = m.mu(i) - aS / g.beta_j;
    return -qmean - aS / (m.alpha(i) * g.beta_j * g.beta_j) + W(i, j) / g.beta_j * m.sigma(i, i);
}

MonotonicityReport monotonicity_check(const Market& m, const WeightMatrix& W, int j,
                                      const Vec& split) {
    if (split.size() != m.n()) throw Error(Errc::DimensionMismatch, "split length");
    if (j < 0 || j >= W.h()) throw Error(Errc::InvalidSplit, "group index out of range");
    Vec w1 = Vec::Zero(m.n()), w2 = Vec::Zero(m.n());
    bool any = false;
    for (int k = 0; k < m.n(); ++k) {
        const double s = split(k) > kMemberTol ? split(k) : 0.0;
        if (s > 0 && !W.member(k, j))
            throw Error(Errc::InvalidSplit, "bank " + std::to_string(k + 1) + " not in group");
        if (s > W(k, j) + kMemberTol)
            throw Error(Errc::InvalidSplit, "split weight exceeds group weight");
        if (s < 0) throw Error(Errc::InvalidSplit, "negative split weight");
        w1(k) = std::min(s, W(k, j));
        const double rest = W(k, j) - w1(k);
        w2(k) = rest > kMemberTol ? rest : 0.0;
        any = any || w1(k) > 0;
    }
    if (!any) throw Error(Errc::InvalidSplit, "empty split");

    const auto rep = allocation_overlap(m, W);
    MonotonicityReport r{};
    double eta_p = 0, b1 = 0, b2 = 0;
    r.left = 0;
    for (int k = 0; k < m.n(); ++k) {
        if (w1(k) > 0) {
            const double f = w1(k) / W(k, j);
            r.left += f * rep.rho_ij(k, j);
            eta_p += f / m.alpha(k);
            b1 += 1.0 / m.alpha(k);
        }
        if (w2(k) > 0) b2 += 1.0 / m.alpha(k);
    }
    r.eta_prime = eta_p;
    r.beta_prime = rep.beta - rep.beta_j(j) + b1 + b2;
    const auto g1 = group_stats(m, w1);
    const double lg = std::log(r.beta_prime / -m.budget);
    r.right = eta_p * (lg - g1.mu_s / eta_p + g1.var_s / (2 * eta_p * eta_p));
    r.holds = r.left <= r.right + 1e-10 * std::max(1.0, std::abs(r.right));

    r.d_m = rep.d(j);
    r.d_m1 = group_constant_entry(m, w1, b1, r.beta_prime);
    r.d_m2 = b2 > 0 ? group_constant_entry(m, w2, b2, r.beta_prime) : 0.0;
    r.subadditive = r.d_m <= r.d_m1 + r.d_m2 + 1e-10 * std::max(1.0, std::abs(r.d_m));
    // a Gaussian sum is nonnegative only when it is a nonnegative constant
    const auto g2 = group_stats(m, w2);
    r.subsums_nonnegative = g1.var_s <= 0 && g1.mu_s >= 0 && g2.var_s <= 0 && g2.mu_s >= 0;
    return r;
}

} // namespace sysrisk
