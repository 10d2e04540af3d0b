#pragma once

#include "sysrisk/overlap.hpp"

namespace sysrisk {

// smallest weight the best response puts on a group it only nominally joins
constexpr double kSplitFloor = 1e-8;

// coefficients of bank i's two-group risk as a quadratic in w = w_{i,1};
// beta1/beta2 include 1/alpha_i, beta is the total with i in one group and
// beta_prime = beta + 1/alpha_i the total when i splits
struct BestResponseCoefficients {
    double A = 0, B1 = 0, B2 = 0;
    double beta1 = 0, beta2 = 0, beta = 0, beta_prime = 0;
    double alpha_i = 0;
    double q1 = 0, q2 = 0;  // sum_{k,m != i} w_k,j w_m,j sigma_km
    double c1 = 0, c2 = 0;  // 1/beta_j - 1/(beta_j^2 alpha_i)
    double abs_cross = 0;   // sum_{k != i} |sigma_ki|
    double log_gap = 0;     // (2/a) log(beta'/-B) - (1/a) log(beta/-B)
};

BestResponseCoefficients coefficients(const Market& m, const Mat& w, int i);

double interior_w_star(const BestResponseCoefficients& c);
bool interior_condition(const BestResponseCoefficients& c);

// the two inequalities that make the interior optimum beat (1,0) and (0,1)
struct DecisionCondition {
    bool beats_first;   // interior < risk at (1,0)
    bool beats_second;  // interior < risk at (0,1)
    double gap_first;   // interior - (1,0), closed form
    double gap_second;  // interior - (0,1), closed form
};
DecisionCondition decision_condition(const BestResponseCoefficients& c);

bool sufficient_interior_condition(const Market& m, const Mat& w, int i);

struct BestResponse {
    Vec row;
    double risk;
    bool interior;
};

// exact best response over the whole segment {(w, 1-w) : w in [0,1]}
BestResponse best_response_two_groups(const Market& m, const Mat& w, int i);

// simplex grid of resolution 1/steps plus the current row, any h
BestResponse best_response_grid(const Market& m, const Mat& w, int i, int steps);

} // namespace sysrisk
