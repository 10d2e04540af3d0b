#include "sysrisk/market.hpp"

#include <cmath>
#include <string>

namespace sysrisk {

const char* errc_name(Errc c) {
    switch (c) {
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NotPSD: return "NotPSD";
    case Errc::NonPositiveAlpha: return "NonPositiveAlpha";
    case Errc::NonNegativeBudget: return "NonNegativeBudget";
    case Errc::NonPositiveBeta: return "NonPositiveBeta";
    case Errc::InvalidPartition: return "InvalidPartition";
    case Errc::SingleBlock: return "SingleBlock";
    case Errc::InvalidWeights: return "InvalidWeights";
    case Errc::NotMember: return "NotMember";
    case Errc::ZeroWeight: return "ZeroWeight";
    case Errc::InvalidSplit: return "InvalidSplit";
    case Errc::EmptyCounterparty: return "EmptyCounterparty";
    case Errc::TooLarge: return "TooLarge";
    case Errc::NotConverged: return "NotConverged";
    case Errc::DegenerateWeights: return "DegenerateWeights";
    case Errc::NotIID: return "NotIID";
    case Errc::ParseError: return "ParseError";
    case Errc::UnknownExample: return "UnknownExample";
    case Errc::NonPositivePrice: return "NonPositivePrice";
    case Errc::TooFewRows: return "TooFewRows";
    case Errc::ZeroVariance: return "ZeroVariance";
    }
    return "Unknown";
}

double min_eigenvalue(const Mat& sym) {
    if (sym.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

Market validate_market(Vec mu, Mat sigma, Vec alpha, double budget,
                       const ValidateOptions& opt) {
    const auto n = mu.size();
    if (n == 0) throw Error(Errc::DimensionMismatch, "empty market");
    if (sigma.rows() != n || sigma.cols() != n || alpha.size() != n)
        throw Error(Errc::DimensionMismatch,
                    "mu has " + std::to_string(n) + " entries, sigma is " +
                        std::to_string(sigma.rows()) + "x" + std::to_string(sigma.cols()) +
                        ", alpha has " + std::to_string(alpha.size()));
    if (!mu.allFinite() || !sigma.allFinite() || !alpha.allFinite() || !std::isfinite(budget))
        throw Error(Errc::DimensionMismatch, "non-finite input");
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(alpha(i) > 0))
            throw Error(Errc::NonPositiveAlpha, "alpha[" + std::to_string(i + 1) + "] <= 0");
    if (!(budget < 0)) throw Error(Errc::NonNegativeBudget, "B must be < 0");

    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw Error(Errc::NotPSD, "sigma is not symmetric");
    Mat s = 0.5 * (sigma + sigma.transpose());

    if (!opt.allow_indefinite) {
        Eigen::SelfAdjointEigenSolver<Mat> es(s);
        const Vec& lam = es.eigenvalues();
        const double lmax = std::max(lam(n - 1), 0.0);
        const double tol = 1e-10 * lmax;
        if (lam(0) < -tol)
            throw Error(Errc::NotPSD, "min eigenvalue " + std::to_string(lam(0)));
        if (lam(0) < 0) {
            // clip the tiny negatives, leave everything else untouched
            Vec clipped = lam.cwiseMax(0.0);
            s = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
            s = 0.5 * (s + s.transpose());
        }
    }
    return Market{std::move(mu), std::move(s), std::move(alpha), budget};
}

Mat cov_from_sd_corr(const Vec& sd, const Mat& corr) {
    if (corr.rows() != sd.size() || corr.cols() != sd.size())
        throw Error(Errc::DimensionMismatch, "sd/corr size mismatch");
    return sd.asDiagonal() * corr * sd.asDiagonal();
}

GroupStats group_stats(const Market& m, const Vec& a) {
    if (a.size() != m.n()) throw Error(Errc::DimensionMismatch, "group vector length");
    double v = a.dot(m.sigma * a);
    // roundoff only; an indefinite fixture keeps its (possibly negative) value
    if (v < 0 && v > -1e-12 * a.squaredNorm() * m.sigma.cwiseAbs().maxCoeff()) v = 0;
    return {a.dot(m.mu), v};
}

TiltedMoments tilted_moments(const Market& m, const Vec& a, double beta) {
    if (!(beta > 0)) throw Error(Errc::NonPositiveBeta, "beta must be > 0");
    const auto g = group_stats(m, a);
    TiltedMoments t;
    t.mu_s = g.mu_s;
    t.var_s = g.var_s;
    t.z0 = std::exp(-g.mu_s / beta + g.var_s / (2 * beta * beta));
    const Vec aS = m.sigma * a;
    t.xi = (m.mu - aS / beta) * t.z0;
    t.s1 = (g.mu_s - g.var_s / beta) * t.z0;
    return t;
}

} // namespace sysrisk
