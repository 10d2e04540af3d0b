#include "sysrisk/mc.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace sysrisk {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

Mat sampling_factor(const Mat& s) {
    Eigen::LLT<Mat> llt(s);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    // singular or clipped covariance
    Eigen::SelfAdjointEigenSolver<Mat> es(s);
    const Vec lam = es.eigenvalues();
    if (lam(0) < -1e-10 * std::max(1.0, lam(lam.size() - 1)))
        throw Error(Errc::NotPSD, "cannot sample from an indefinite covariance");
    return es.eigenvectors() * lam.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

template <class F>
void parallel_chunks(int chunks, F&& body) {
    const int t = std::max(1, std::min<int>(chunks, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (int k = 0; k < t; ++k)
        pool.emplace_back([&, k] {
            for (int c = k; c < chunks; c += t) body(c);
        });
    for (auto& th : pool) th.join();
}

} // namespace

Mat sample_X(const Market& m, int count, std::uint64_t seed) {
    if (count < 1) throw Error(Errc::DimensionMismatch, "count must be >= 1");
    const int n = m.n();
    const Mat L = sampling_factor(m.sigma);
    Mat x(n, count);
    const int chunks = (count + kChunkSize - 1) / kChunkSize;
    parallel_chunks(chunks, [&](int c) {
        std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(c))));
        std::normal_distribution<double> nd;
        const int lo = c * kChunkSize, hi = std::min(count, lo + kChunkSize);
        Mat z(L.cols(), hi - lo);
        for (int s = 0; s < hi - lo; ++s)
            for (Eigen::Index r = 0; r < z.rows(); ++r) z(r, s) = nd(rng);
        x.middleCols(lo, hi - lo) = (L * z).colwise() + m.mu;
    });
    return x;
}

Estimate mean_estimate(const Vec& f) {
    const double n = static_cast<double>(f.size());
    const double mean = f.sum() / n;
    if (f.size() < 2) return {mean, 0.0};
    // a constant sample is exact; summation noise would otherwise leak into se
    if (f.minCoeff() == f.maxCoeff()) return {f(0), 0.0};
    const double var = (f.array() - mean).square().sum() / (n - 1);
    return {mean, std::sqrt(var / n)};
}

Estimate tilted_estimate(const Mat& samples, const Vec& a, double beta, const Vec& f) {
    if (!(beta > 0)) throw Error(Errc::NonPositiveBeta, "beta must be > 0");
    if (a.size() != samples.rows() || f.size() != samples.cols())
        throw Error(Errc::DimensionMismatch, "tilted estimate shapes");
    const Vec lw = -(samples.transpose() * a) / beta;
    const double mx = lw.maxCoeff();
    const Vec w = (lw.array() - mx).exp().matrix();
    double sw = 0, swf = 0, sw2 = 0;
    for (Eigen::Index s = 0; s < w.size(); ++s) {
        sw += w(s);
        swf += w(s) * f(s);
        sw2 += w(s) * w(s);
    }
    const double ess = sw * sw / sw2;
    if (!(ess >= 10)) throw Error(Errc::DegenerateWeights, "effective sample size " + std::to_string(ess));
    if (f.minCoeff() == f.maxCoeff()) return {f(0), 0.0};
    const double est = swf / sw;
    double v = 0;
    for (Eigen::Index s = 0; s < w.size(); ++s) {
        const double wn = w(s) / sw;
        v += wn * wn * (f(s) - est) * (f(s) - est);
    }
    return {est, std::sqrt(v)};
}

Estimate tilted_estimate(const Mat& samples, const Vec& a, double beta,
                         const std::function<double(const Vec&)>& f) {
    Vec fv(samples.cols());
    for (Eigen::Index s = 0; s < samples.cols(); ++s) fv(s) = f(samples.col(s));
    return tilted_estimate(samples, a, beta, fv);
}

Estimate budget_check(const Market& m, const WeightMatrix& W, const Mat& samples, double d_shift) {
    const auto r = allocation_overlap(m, W);
    const int n = m.n(), h = W.h();
    Vec u(samples.cols());
    Mat cols = Mat::Zero(n, h);
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < n; ++i)
            if (W.member(i, j)) cols(i, j) = W(i, j);
    const Mat S = cols.transpose() * samples;  // h x count
    for (Eigen::Index s = 0; s < samples.cols(); ++s) {
        double tot = 0;
        for (int j = 0; j < h; ++j) {
            if (r.beta_j(j) <= 0) continue;
            const double dj = r.d(j) + d_shift;
            for (int i = 0; i < n; ++i) {
                if (!W.member(i, j)) continue;
                const double x = samples(i, s);
                const double y = -W(i, j) * x + (S(j, s) + dj) / (m.alpha(i) * r.beta_j(j));
                tot += -std::exp(-m.alpha(i) * (W(i, j) * x + y)) / m.alpha(i);
            }
        }
        u(s) = tot;
    }
    return mean_estimate(u);
}

Estimate budget_check(const Market& m, const Partition& p, const Mat& samples, double d_shift) {
    return budget_check(m, WeightMatrix::from_partition(p, p.size()), samples, d_shift);
}

TrivialNashBound trivial_nash_B_bound(const Market& m) {
    const int n = m.n();
    const double sig = m.sigma(0, 0);
    const double tol = 1e-12 * std::max(1.0, std::abs(sig));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            if (std::abs(m.sigma(i, k) - (i == k ? sig : 0.0)) > tol)
                throw Error(Errc::NotIID, "sigma must be a multiple of the identity");
    TrivialNashBound out{std::vector<bool>(n), Vec(n), true};
    const double beta = (1.0 / m.alpha.array()).sum();
    for (int i = 0; i < n; ++i) {
        const double a = m.alpha(i);
        const double b1 = beta, b2 = 1.0 / a, bp = b1 + b2;
        // g(w) = p w^2 + q w + r, convex; log(-B) <= min over [0,1]
        auto g = [&](double w) {
            const double v = 1 - w;
            return std::log(bp * bp / beta) -
                   a * (1 / b1 - (w * w / b1 + v * v / b2)) * sig -
                   0.5 * ((w * w / (b1 * b1) + v * v / (b2 * b2)) - 1 / (b1 * b1)) * sig;
        };
        const double g0 = g(0), g1 = g(1), gh = g(0.5);
        const double p = 2 * (g0 + g1 - 2 * gh);
        const double q = g1 - g0 - p;
        double wmin = p > 0 ? std::clamp(-q / (2 * p), 0.0, 1.0) : (g0 < g1 ? 0.0 : 1.0);
        const double gmin = std::min({g(wmin), g0, g1});
        out.critical_B(i) = -std::exp(gmin);
        out.per_bank[i] = std::log(-m.budget) <= gmin;
        out.overall = out.overall && out.per_bank[i];
    }
    return out;
}

} // namespace sysrisk
