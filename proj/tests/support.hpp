#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <doctest.h>

#include "sysrisk/equilibrium.hpp"
#include "sysrisk/mc.hpp"

namespace testing {

using sysrisk::Mat;
using sysrisk::Market;
using sysrisk::Vec;

inline double unif(std::mt19937_64& g, double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(g);
}

// random correlation from a few latent factors plus idiosyncratic noise, so it is PSD
inline Mat random_corr(std::mt19937_64& g, int n) {
    std::normal_distribution<double> nd;
    const int k = 2;
    Mat L(n, k + 1);
    for (int i = 0; i < n; ++i) {
        for (int f = 0; f < k; ++f) L(i, f) = nd(g);
        L(i, k) = unif(g, 0.4, 1.2);
    }
    Mat c = L.leftCols(k) * L.leftCols(k).transpose();
    c.diagonal() += L.col(k).cwiseAbs2();
    const Vec s = c.diagonal().cwiseSqrt().cwiseInverse();
    c = s.asDiagonal() * c * s.asDiagonal();
    c.diagonal().setOnes();
    return c;
}

struct MarketShape {
    double mu_lo = -1, mu_hi = 1;
    double sd_lo = 0.3, sd_hi = 1.5;
    double alpha_lo = 0.5, alpha_hi = 2.0;
    double B_lo = -5, B_hi = -0.5;
};

inline Market random_market(std::mt19937_64& g, int n, const MarketShape& s = {}) {
    Vec mu(n), sd(n), alpha(n);
    for (int i = 0; i < n; ++i) {
        mu(i) = unif(g, s.mu_lo, s.mu_hi);
        sd(i) = unif(g, s.sd_lo, s.sd_hi);
        alpha(i) = unif(g, s.alpha_lo, s.alpha_hi);
    }
    return sysrisk::validate_market(mu, sysrisk::cov_from_sd_corr(sd, random_corr(g, n)), alpha,
                                    unif(g, s.B_lo, s.B_hi));
}

// rows on the simplex, some entries exactly zero
inline sysrisk::WeightMatrix random_weight_matrix(std::mt19937_64& g, int n, int h) {
    Mat w(n, h);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < h; ++j) w(i, j) = unif(g, 0, 1) < 0.25 ? 0.0 : unif(g, 0.05, 1);
        if (w.row(i).sum() == 0) w(i, std::uniform_int_distribution<int>(0, h - 1)(g)) = 1;
        w.row(i) /= w.row(i).sum();
    }
    return sysrisk::WeightMatrix(w);
}

inline sysrisk::Partition random_partition(std::mt19937_64& g, int n) {
    std::vector<int> lab(n);
    for (int i = 0; i < n; ++i) lab[i] = std::uniform_int_distribution<int>(0, n - 1)(g);
    return sysrisk::Partition::from_labels(lab);
}

template <class F>
sysrisk::Errc code_of(F&& f) {
    try {
        f();
    } catch (const sysrisk::Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return sysrisk::Errc::ParseError;
}

inline bool within_se(const sysrisk::Estimate& e, double exact, double k = 4.0) {
    return std::abs(e.value - exact) <= k * e.se + 1e-12 * std::max(1.0, std::abs(exact));
}

// central difference
template <class F>
double fd(F&& f, double h = 1e-5) {
    return (f(h) - f(-h)) / (2 * h);
}

inline Market block_market(int n, const std::vector<std::vector<int>>& blocks, double rho) {
    Mat c = Mat::Identity(n, n);
    for (const auto& b : blocks)
        for (int i : b)
            for (int j : b)
                if (i != j) c(i, j) = rho;
    return sysrisk::validate_market(Vec::Zero(n), c, Vec::Ones(n), -1.0, {true});
}

} // namespace testing
