#include "sysrisk/disjoint.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace sysrisk {

Partition::Partition(std::vector<std::vector<int>> blocks, int n) : n_(n), label_(n, -1) {
    for (auto& b : blocks) {
        if (b.empty()) throw Error(Errc::InvalidPartition, "empty block");
        std::sort(b.begin(), b.end());
        for (int i : b) {
            if (i < 0 || i >= n)
                throw Error(Errc::InvalidPartition, "bank index " + std::to_string(i + 1) +
                                                        " out of range");
            if (label_[i] != -1)
                throw Error(Errc::InvalidPartition,
                            "bank " + std::to_string(i + 1) + " appears twice");
            label_[i] = 0;
        }
    }
    for (int i = 0; i < n; ++i)
        if (label_[i] == -1)
            throw Error(Errc::InvalidPartition, "bank " + std::to_string(i + 1) + " missing");
    std::sort(blocks.begin(), blocks.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    blocks_ = std::move(blocks);
    for (int m = 0; m < size(); ++m)
        for (int i : blocks_[m]) label_[i] = m;
}

Partition Partition::single(int n) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    return Partition({all}, n);
}

Partition Partition::singletons(int n) {
    std::vector<std::vector<int>> b(n);
    for (int i = 0; i < n; ++i) b[i] = {i};
    return Partition(std::move(b), n);
}

Partition Partition::from_labels(const std::vector<int>& labels) {
    std::map<int, std::vector<int>> g;
    for (int i = 0; i < static_cast<int>(labels.size()); ++i) g[labels[i]].push_back(i);
    std::vector<std::vector<int>> b;
    for (auto& kv : g) b.push_back(std::move(kv.second));
    return Partition(std::move(b), static_cast<int>(labels.size()));
}

Vec Partition::indicator(int m) const {
    Vec a = Vec::Zero(n_);
    for (int i : blocks_[m]) a(i) = 1.0;
    return a;
}

std::string Partition::str() const {
    std::ostringstream os;
    for (int m = 0; m < size(); ++m) {
        if (m) os << '|';
        for (std::size_t k = 0; k < blocks_[m].size(); ++k) {
            if (k) os << ',';
            os << blocks_[m][k] + 1;
        }
    }
    return os.str();
}

Partition parse_partition(const std::string& text, int n) {
    std::vector<std::vector<int>> blocks;
    std::vector<int> seen(n, 0);
    std::stringstream bs(text);
    std::string blk;
    while (std::getline(bs, blk, '|')) {
        std::vector<int> b;
        std::stringstream is(blk);
        std::string tok;
        while (std::getline(is, tok, ',')) {
            auto first = tok.find_first_not_of(" \t");
            auto last = tok.find_last_not_of(" \t");
            if (first == std::string::npos)
                throw Error(Errc::ParseError, "empty index in \"" + text + "\"");
            tok = tok.substr(first, last - first + 1);
            std::size_t pos = 0;
            int v = 0;
            try {
                v = std::stoi(tok, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != tok.size() || pos == 0)
                throw Error(Errc::ParseError, "bad index \"" + tok + "\"");
            if (v < 1 || v > n)
                throw Error(Errc::ParseError, "index " + tok + " out of range 1.." +
                                                  std::to_string(n));
            if (seen[v - 1]++)
                throw Error(Errc::ParseError, "duplicate index " + tok);
            b.push_back(v - 1);
        }
        if (b.empty()) throw Error(Errc::ParseError, "empty block in \"" + text + "\"");
        blocks.push_back(std::move(b));
    }
    for (int i = 0; i < n; ++i)
        if (!seen[i]) throw Error(Errc::ParseError, "bank " + std::to_string(i + 1) + " missing");
    return Partition(std::move(blocks), n);
}

Betas betas_disjoint(const Market& m, const Partition& p) {
    Betas b{Vec::Zero(p.size()), 0.0};
    for (int k = 0; k < p.size(); ++k)
        for (int i : p.block(k)) b.group(k) += 1.0 / m.alpha(i);
    b.total = (1.0 / m.alpha.array()).sum();
    return b;
}

namespace {

double d_closed(double beta_m, double beta, double B, const GroupStats& g) {
    return beta_m * std::log(beta / -B) - g.mu_s + g.var_s / (2 * beta_m);
}

} // namespace

double group_constant(const Market& m, const Partition& p, int block) {
    const auto b = betas_disjoint(m, p);
    return d_closed(b.group(block), b.total, m.budget, group_stats(m, p.indicator(block)));
}

AllocationReport allocation_disjoint(const Market& m, const Partition& p) {
    const auto b = betas_disjoint(m, p);
    AllocationReport r{Vec::Zero(m.n()), Vec::Zero(p.size()), 0.0, b.group, b.total};
    const double lg = std::log(b.total / -m.budget);
    for (int k = 0; k < p.size(); ++k) {
        const Vec a = p.indicator(k);
        const auto g = group_stats(m, a);
        const Vec aS = m.sigma * a;
        const double bm = b.group(k);
        r.d(k) = d_closed(bm, b.total, m.budget, g);
        for (int i : p.block(k))
            r.rho(i) = -m.mu(i) + lg / m.alpha(i) + aS(i) / bm -
                       g.var_s / (2 * bm * bm * m.alpha(i));
    }
    r.total = r.d.sum();
    return r;
}

double allocation_bank(const Market& m, const Partition& p, int k) {
    const auto& blk = p.block(p.block_of(k));
    double bm = 0, aS = 0, var = 0;
    for (int i : blk) {
        bm += 1.0 / m.alpha(i);
        aS += m.sigma(i, k);
        for (int j : blk) var += m.sigma(i, j);
    }
    const double beta = (1.0 / m.alpha.array()).sum();
    return -m.mu(k) + std::log(beta / -m.budget) / m.alpha(k) + aS / bm -
           var / (2 * bm * bm * m.alpha(k));
}

Vec sample_optimal_Y(const Market& m, const Partition& p, const Vec& x) {
    if (x.size() != m.n()) throw Error(Errc::DimensionMismatch, "sample length");
    const auto r = allocation_disjoint(m, p);
    Vec y(m.n());
    for (int k = 0; k < p.size(); ++k) {
        double s = 0;
        for (int i : p.block(k)) s += x(i);
        for (int i : p.block(k))
            y(i) = -x(i) + (s + r.d(k)) / (m.alpha(i) * r.beta_m(k));
    }
    return y;
}

double eta(const Market& m, const Partition& p, int k) {
    const auto& blk = p.block(p.block_of(k));
    double bm = 0;
    for (int i : blk) bm += 1.0 / m.alpha(i);
    const double sz = static_cast<double>(blk.size());
    return (1.0 / bm) * (1.0 - sz / (2 * m.alpha(k) * bm));
}

LemmaResult lemma_not_nash(const Market& m, const Partition& p) {
    if (p.size() < 2) throw Error(Errc::SingleBlock, "lemma needs at least two blocks");
    LemmaResult res{LemmaVerdict::inconclusive, {}, -1, -1};
    std::vector<double> eh;
    for (int b = 0; b < p.size(); ++b) {
        int best = p.block(b).front();
        for (int i : p.block(b))
            if (m.alpha(i) > m.alpha(best)) best = i;
        res.heads.push_back(best);
        eh.push_back(eta(m, p, best));
    }
    const double emax = *std::max_element(eh.begin(), eh.end());
    auto close = [](double a, double b) {
        return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
    };
    // argmax may be tied; any maximiser is a valid head of heads
    for (int s = 0; s < p.size(); ++s) {
        if (!close(eh[s], emax) && eh[s] < emax) continue;
        const int ks = res.heads[s];
        for (int o = 0; o < p.size(); ++o) {
            if (o == s) continue;
            const int ko = res.heads[o];
            const double lhs = m.alpha(ks) / m.alpha(ko);
            const double rhs = 1.0 + 1.0 / static_cast<double>(p.block(o).size());
            const bool eq = close(lhs, rhs);
            const bool strict = lhs < rhs && !eq;
            const bool eta_strict = eh[s] > eh[o] && !close(eh[s], eh[o]);
            if (strict || (eq && eta_strict)) {
                res.verdict = LemmaVerdict::not_nash_strict;
                res.k_star = ks;
                res.k_other = ko;
                return res;
            }
        }
    }
    return res;
}

} // namespace sysrisk
