#pragma once

#include <string>
#include <vector>

#include "sysrisk/market.hpp"

namespace sysrisk {

// disjoint grouping of {0..n-1}; always kept canonical: blocks ordered by
// smallest member, members ascending
class Partition {
public:
    Partition() = default;
    Partition(std::vector<std::vector<int>> blocks, int n);

    static Partition single(int n);
    static Partition singletons(int n);
    // labels[i] = block id of bank i, any integers
    static Partition from_labels(const std::vector<int>& labels);

    int n() const { return n_; }
    int size() const { return static_cast<int>(blocks_.size()); }
    const std::vector<std::vector<int>>& blocks() const { return blocks_; }
    const std::vector<int>& block(int m) const { return blocks_[m]; }
    int block_of(int i) const { return label_[i]; }
    // 0/1 group vector A_m
    Vec indicator(int m) const;

    // 1-based "1,3|2,4"
    std::string str() const;

    bool operator==(const Partition& o) const { return blocks_ == o.blocks_; }
    bool operator<(const Partition& o) const { return blocks_ < o.blocks_; }

private:
    int n_ = 0;
    std::vector<std::vector<int>> blocks_;
    std::vector<int> label_;
};

// parses the 1-based grammar "1,3|2,4"; every bank must appear exactly once
Partition parse_partition(const std::string& text, int n);

struct Betas {
    Vec group;
    double total;
};

struct AllocationReport {
    Vec rho;
    Vec d;
    double total;
    Vec beta_m;
    double beta;
};

Betas betas_disjoint(const Market& m, const Partition& p);
double group_constant(const Market& m, const Partition& p, int block);
AllocationReport allocation_disjoint(const Market& m, const Partition& p);
// rho^k only, without building the whole report
double allocation_bank(const Market& m, const Partition& p, int k);

// Y^i = -X^i + (S_m + d_m)/(alpha_i beta_m) for one draw x
Vec sample_optimal_Y(const Market& m, const Partition& p, const Vec& x);

double eta(const Market& m, const Partition& p, int k);

enum class LemmaVerdict { not_nash_strict, inconclusive };

struct LemmaResult {
    LemmaVerdict verdict;
    std::vector<int> heads;  // one per block
    int k_star = -1;         // head of heads that satisfies the condition, if any
    int k_other = -1;        // the other head it would join
};

LemmaResult lemma_not_nash(const Market& m, const Partition& p);

} // namespace sysrisk
