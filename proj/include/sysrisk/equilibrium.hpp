#pragma once

#include <cstdint>
#include <vector>

#include "sysrisk/best_response.hpp"
#include "sysrisk/disjoint.hpp"
#include "sysrisk/overlap.hpp"

namespace sysrisk {

bool is_nash_disjoint(const Market& m, const Partition& p);

// best block for bank k: index of an existing block, or p.size() for a fresh
// singleton; stays put unless the improvement exceeds the tie tolerance
struct DisjointMove {
    int target;
    double risk;
    double current;
};
DisjointMove best_response_disjoint(const Market& m, const Partition& p, int k);

std::vector<Partition> brute_force_nash_disjoint(const Market& m);

struct Move {
    int bank;
    std::vector<double> from;  // disjoint: old block members, overlap: old row
    std::vector<double> to;    // disjoint: members of the joined block (before joining)
    double delta;              // new risk - old risk
};

struct EquilibriumResult {
    bool overlap = false;
    Partition partition;
    WeightMatrix weights;
    std::vector<Move> trajectory;
    bool converged = false;
    int iterations = 0;
    std::uint64_t seed = 0;
};

struct PlayOptions {
    int max_iter = 10000;
    int grid = 200;  // simplex resolution for h > 2
};

EquilibriumResult fictitious_play_disjoint(const Market& m, std::uint64_t seed,
                                           const PlayOptions& opt = {});

struct NashScan {
    int grid = 200;  // segment/simplex resolution; 0 disables the scan
};

bool is_nash_overlap(const Market& m, const WeightMatrix& w, const NashScan& scan = {});

// best response of one row, analytic for h = 2, grid otherwise
BestResponse overlap_best_response(const Market& m, const Mat& w, int i, int grid);

EquilibriumResult fictitious_play_overlap(const Market& m, const WeightMatrix& w0,
                                          std::uint64_t seed, const PlayOptions& opt = {});

// per row: max |best response - row|, used to judge printed (rounded) matrices
Vec best_response_gaps(const Market& m, const WeightMatrix& w, int grid = 200);

// entrywise max distance, minimised over column permutations
double distance_up_to_permutation(const Mat& a, const Mat& b);

// w0 rows drawn uniformly (h = 2: (u, 1-u)), reproducible from seed
WeightMatrix random_weights(int n, int h, std::uint64_t seed);

} // namespace sysrisk
