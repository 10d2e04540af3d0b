#include "sysrisk/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace sysrisk {

namespace {

bool improves(double cand, double cur) {
    return cand < cur - 1e-12 * std::max(1.0, std::abs(cur));
}

std::vector<int> labels_of(const Partition& p) {
    std::vector<int> l(p.n());
    for (int i = 0; i < p.n(); ++i) l[i] = p.block_of(i);
    return l;
}

} // namespace

DisjointMove best_response_disjoint(const Market& m, const Partition& p, int k) {
    const double cur = allocation_bank(m, p, k);
    DisjointMove best{p.block_of(k), cur, cur};
    auto lab = labels_of(p);
    const int home = p.block_of(k);
    const bool alone = p.block(home).size() == 1;
    for (int b = 0; b <= p.size(); ++b) {
        if (b == home) continue;
        if (b == p.size() && alone) continue;  // already a singleton
        lab[k] = b;
        const auto q = Partition::from_labels(lab);
        const double r = allocation_bank(m, q, k);
        if (improves(r, best.risk)) best = {b, r, cur};
    }
    return best;
}

bool is_nash_disjoint(const Market& m, const Partition& p) {
    for (int k = 0; k < m.n(); ++k)
        if (best_response_disjoint(m, p, k).target != p.block_of(k)) return false;
    return true;
}

std::vector<Partition> brute_force_nash_disjoint(const Market& m) {
    const int n = m.n();
    if (n > 10) throw Error(Errc::TooLarge, "brute force limited to n <= 10");
    std::vector<Partition> out;
    // restricted growth strings enumerate every set partition exactly once
    std::vector<int> a(n, 0), mx(n, 0);
    while (true) {
        const auto p = Partition::from_labels(a);
        if (is_nash_disjoint(m, p)) out.push_back(p);
        int i = n - 1;
        while (i > 0 && a[i] == mx[i - 1] + 1) --i;
        if (i == 0) break;
        ++a[i];
        mx[i] = std::max(mx[i - 1], a[i]);
        for (int j = i + 1; j < n; ++j) {
            a[j] = 0;
            mx[j] = mx[i];
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

EquilibriumResult fictitious_play_disjoint(const Market& m, std::uint64_t seed,
                                           const PlayOptions& opt) {
    const int n = m.n();
    EquilibriumResult res;
    res.seed = seed;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    auto p = Partition::singletons(n);
    int quiet = 0;
    for (int it = 0; it < opt.max_iter; ++it) {
        res.iterations = it + 1;
        const int k = pick(rng);
        const auto mv = best_response_disjoint(m, p, k);
        if (mv.target != p.block_of(k)) {
            Move rec;
            rec.bank = k;
            for (int i : p.block(p.block_of(k))) rec.from.push_back(i);
            if (mv.target < p.size())
                for (int i : p.block(mv.target)) rec.to.push_back(i);
            rec.delta = mv.risk - mv.current;
            res.trajectory.push_back(std::move(rec));
            auto lab = labels_of(p);
            lab[k] = mv.target;
            p = Partition::from_labels(lab);
            quiet = 0;
            continue;
        }
        if (++quiet >= n) {
            // a window of quiet picks can still miss a bank; confirm with a full sweep
            if (is_nash_disjoint(m, p)) {
                res.converged = true;
                break;
            }
            quiet = 0;
        }
    }
    res.partition = p;
    return res;
}

BestResponse overlap_best_response(const Market& m, const Mat& w, int i, int grid) {
    if (w.cols() == 2) return best_response_two_groups(m, w, i);
    return best_response_grid(m, w, i, grid);
}

bool is_nash_overlap(const Market& m, const WeightMatrix& W, const NashScan& scan) {
    const Mat& w = W.w();
    for (int i = 0; i < m.n(); ++i) {
        const double cur = bank_risk(m, w, i);
        const double tol = 1e-9 * std::max(1.0, std::abs(cur));
        if (W.h() == 2) {
            if (best_response_two_groups(m, w, i).risk < cur - tol) return false;
        }
        if (scan.grid > 0 && best_response_grid(m, w, i, scan.grid).risk < cur - tol)
            return false;
    }
    return true;
}

Vec best_response_gaps(const Market& m, const WeightMatrix& W, int grid) {
    Vec g(m.n());
    for (int i = 0; i < m.n(); ++i) {
        const auto br = overlap_best_response(m, W.w(), i, grid);
        g(i) = (br.row - W.w().row(i).transpose()).cwiseAbs().maxCoeff();
    }
    return g;
}

double distance_up_to_permutation(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error(Errc::DimensionMismatch, "matrix shapes differ");
    std::vector<int> perm(a.cols());
    for (int j = 0; j < static_cast<int>(perm.size()); ++j) perm[j] = j;
    double best = std::numeric_limits<double>::infinity();
    do {
        double d = 0;
        for (int j = 0; j < static_cast<int>(perm.size()); ++j)
            d = std::max(d, (a.col(perm[j]) - b.col(j)).cwiseAbs().maxCoeff());
        best = std::min(best, d);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

WeightMatrix random_weights(int n, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> e(1.0);
    Mat w(n, h);
    for (int i = 0; i < n; ++i) {
        // normalised exponentials are uniform on the simplex
        for (int j = 0; j < h; ++j) w(i, j) = e(rng);
        w.row(i) /= w.row(i).sum();
    }
    return WeightMatrix(w);
}

EquilibriumResult fictitious_play_overlap(const Market& m, const WeightMatrix& w0,
                                          std::uint64_t seed, const PlayOptions& opt) {
    if (w0.n() != m.n()) throw Error(Errc::DimensionMismatch, "weight rows != banks");
    if (w0.h() < 2) throw Error(Errc::InvalidWeights, "overlap dynamics need h >= 2");
    const int n = m.n();
    EquilibriumResult res;
    res.overlap = true;
    res.seed = seed;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    Mat w = w0.w();

    auto changed = [](const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff() > 1e-9; };
    auto sweep_stable = [&]() {
        for (int i = 0; i < n; ++i)
            if (changed(overlap_best_response(m, w, i, opt.grid).row, w.row(i).transpose()))
                return false;
        return true;
    };

    int quiet = 0;
    for (int it = 0; it < opt.max_iter; ++it) {
        res.iterations = it + 1;
        const int i = pick(rng);
        const Vec cur = w.row(i);
        const auto br = overlap_best_response(m, w, i, opt.grid);
        if (changed(br.row, cur)) {
            const double before = bank_risk(m, w, i);
            w.row(i) = br.row;
            res.trajectory.push_back(Move{i, std::vector<double>(cur.data(), cur.data() + cur.size()),
                                          std::vector<double>(br.row.data(), br.row.data() + br.row.size()),
                                          br.risk - before});
            quiet = 0;
            continue;
        }
        if (++quiet >= n) {
            if (sweep_stable()) {
                res.converged = true;
                break;
            }
            quiet = 0;
        }
    }
    res.weights = WeightMatrix(normalize_rows(w)).canonical();
    return res;
}

} // namespace sysrisk
