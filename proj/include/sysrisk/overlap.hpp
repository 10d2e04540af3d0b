#pragma once

#include <vector>

#include "sysrisk/disjoint.hpp"
#include "sysrisk/market.hpp"

namespace sysrisk {

// n x h row-stochastic split of each bank's risk factor across h groups
class WeightMatrix {
public:
    WeightMatrix() = default;
    // rows must sum to 1 within 1e-9; entries below the membership threshold
    // snap to 0 and the row is renormalised
    explicit WeightMatrix(Mat w);

    static WeightMatrix from_partition(const Partition& p, int h);

    int n() const { return static_cast<int>(w_.rows()); }
    int h() const { return static_cast<int>(w_.cols()); }
    const Mat& w() const { return w_; }
    double operator()(int i, int j) const { return w_(i, j); }
    bool member(int i, int j) const { return w_(i, j) > kMemberTol; }

    // columns sorted lexicographically, descending
    WeightMatrix canonical() const;

private:
    Mat w_;
};

Mat normalize_rows(Mat w);

Betas betas_overlap(const Market& m, const Mat& w);
inline Betas betas_overlap(const Market& m, const WeightMatrix& w) { return betas_overlap(m, w.w()); }

struct OverlapReport {
    Mat rho_ij;
    Vec rho;
    Vec d;
    double total;
    Vec beta_j;
    double beta;
};

OverlapReport allocation_overlap(const Market& m, const WeightMatrix& w);

// E_{Q^j}[Y^{i,j}] for an arbitrary column of weights with beta_j and beta given
// (memberships are whatever the caller says they are)
double allocation_entry(const Market& m, const Vec& col, int i, double beta_j, double beta);
double group_constant_entry(const Market& m, const Vec& col, double beta_j, double beta);

// total allocation of bank i under a raw weight matrix (no validation)
double bank_risk(const Market& m, const Mat& w, int i);

// Y^{i,j} for one draw
Mat sample_optimal_Y(const Market& m, const WeightMatrix& w, const Vec& x);

// risk factor perturbation Z: either fixed, or jointly Gaussian with X
struct Shock {
    Vec mean;
    Mat cov;    // Cov(Z, Z)
    Mat cross;  // cross(k, i) = Cov(X^k, Z^i)
    bool deterministic = true;

    static Shock fixed(Vec z);
    static Shock gaussian(Vec mean, Mat cov, Mat cross);
    // Z = X
    static Shock identity(const Market& m);
};

// the market of X + eps Z
Market perturbed_market(const Market& m, const Shock& z, double eps);

double marginal_group_risk(const Market& m, const WeightMatrix& w, int j, const Shock& z);
double local_causal_responsibility(const Market& m, const WeightMatrix& w, int i, int j,
                                   const Shock& z);
double marginal_risk_allocation(const Market& m, const WeightMatrix& w, int i, int j,
                                const Shock& z);
double weight_sensitivity(const Market& m, const WeightMatrix& w, int i, int j);

struct MonotonicityReport {
    double left;        // E_{Q^m}[sum (w'/w) Y^{k,m}]
    double right;       // eta' log(-(beta'/B) E[exp(-S'/eta')])
    bool holds;
    double eta_prime;
    double beta_prime;
    double d_m, d_m1, d_m2;  // d of the group and of its two parts after the split
    bool subadditive;        // d_m <= d_m1 + d_m2
    bool subsums_nonnegative;
};

// splits group j into w' (given) and w_{.,j} - w'
MonotonicityReport monotonicity_check(const Market& m, const WeightMatrix& w, int j,
                                      const Vec& split);

} // namespace sysrisk
