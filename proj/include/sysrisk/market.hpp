#pragma once

#include <Eigen/Dense>

#include "sysrisk/error.hpp"

namespace sysrisk {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// exogenous data of the game: X ~ N(mu, sigma), exponential utilities with
// risk aversions alpha, aggregate utility budget B < 0
struct Market {
    Vec mu;
    Mat sigma;
    Vec alpha;
    double budget = -1.0;

    int n() const { return static_cast<int>(mu.size()); }
};

struct ValidateOptions {
    // some published parameter sets are not PSD; the closed forms are still
    // defined for them, sampling is not
    bool allow_indefinite = false;
};

Market validate_market(Vec mu, Mat sigma, Vec alpha, double budget,
                       const ValidateOptions& opt = {});

// sigma = diag(sd) corr diag(sd)
Mat cov_from_sd_corr(const Vec& sd, const Mat& corr);

double min_eigenvalue(const Mat& sym);

struct GroupStats {
    double mu_s;
    double var_s;
};

// S = a.X ~ N(a.mu, a sigma a')
GroupStats group_stats(const Market& m, const Vec& a);

// E[e^{-S/beta}], E[X^i e^{-S/beta}], E[S e^{-S/beta}]
struct TiltedMoments {
    double z0;
    Vec xi;
    double s1;
    double mu_s;
    double var_s;
};

TiltedMoments tilted_moments(const Market& m, const Vec& a, double beta);

constexpr double kMemberTol = 1e-9;

} // namespace sysrisk
