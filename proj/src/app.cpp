#include "sysrisk/app.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sysrisk::app {

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& msg) {
    throw Error(Errc::ParseError, "field '" + field + "': " + msg);
}

double num(const json& j, const std::string& field) {
    if (!j.is_number()) bad(field, "expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& field) {
    if (!j.is_number_integer()) bad(field, "expected an integer");
    return j.get<int>();
}

} // namespace

Vec parse_vector(const json& j, const std::string& field) {
    if (!j.is_array()) bad(field, "expected an array");
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v(i) = num(j[i], field + "[" + std::to_string(i + 1) + "]");
    return v;
}

Mat parse_matrix(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) bad(field, "expected a non-empty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    Mat m(j.size(), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        const std::string f = field + "[" + std::to_string(r + 1) + "]";
        if (!j[r].is_array() || j[r].size() != cols) bad(f, "ragged matrix row");
        for (std::size_t c = 0; c < cols; ++c)
            m(r, c) = num(j[r][c], f + "[" + std::to_string(c + 1) + "]");
    }
    return m;
}

json to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json to_json(const Mat& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Vec(m.row(r).transpose())));
    return a;
}

MarketConfig parse_config(const json& j) {
    if (!j.is_object()) bad("<root>", "expected an object");
    static const std::set<std::string> known = {"mu", "alpha", "B", "cov", "sd", "corr",
                                                "h", "seed", "init_weights", "samples",
                                                "grid", "max_iter", "allow_indefinite"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) bad(it.key(), "unknown field");
    for (const char* req : {"mu", "alpha", "B"})
        if (!j.contains(req)) bad(req, "missing");

    MarketConfig c;
    c.mu = parse_vector(j["mu"], "mu");
    c.alpha = parse_vector(j["alpha"], "alpha");
    c.B = num(j["B"], "B");
    const bool has_cov = j.contains("cov");
    const bool has_sd = j.contains("sd") || j.contains("corr");
    if (has_cov == has_sd) bad("cov", "give exactly one of cov or sd+corr");
    if (has_cov) {
        c.cov = parse_matrix(j["cov"], "cov");
    } else {
        if (!j.contains("sd")) bad("sd", "missing (corr given)");
        if (!j.contains("corr")) bad("corr", "missing (sd given)");
        c.sd = parse_vector(j["sd"], "sd");
        c.corr = parse_matrix(j["corr"], "corr");
        for (Eigen::Index i = 0; i < c.sd->size(); ++i)
            if ((*c.sd)(i) < 0) bad("sd", "negative entry " + std::to_string(i + 1));
        if (c.corr->rows() == c.corr->cols())
            for (Eigen::Index i = 0; i < c.corr->rows(); ++i)
                if (std::abs((*c.corr)(i, i) - 1.0) > 1e-9)
                    bad("corr", "diagonal entry " + std::to_string(i + 1) + " is not 1");
    }
    if (j.contains("h")) {
        c.h = integer(j["h"], "h");
        if (*c.h < 1) bad("h", "must be >= 1");
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
            bad("seed", "expected a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("init_weights")) {
        const auto& w = j["init_weights"];
        if (w.is_string()) {
            if (w != "uniform" && w != "random") bad("init_weights", "expected \"uniform\" or \"random\"");
        } else {
            parse_matrix(w, "init_weights");
        }
        c.init_weights = w;
    }
    if (j.contains("samples")) {
        c.samples = integer(j["samples"], "samples");
        if (*c.samples < 2) bad("samples", "must be >= 2");
    }
    if (j.contains("grid")) {
        c.grid = integer(j["grid"], "grid");
        if (*c.grid < 1) bad("grid", "must be >= 1");
    }
    if (j.contains("max_iter")) {
        c.max_iter = integer(j["max_iter"], "max_iter");
        if (*c.max_iter < 1) bad("max_iter", "must be >= 1");
    }
    if (j.contains("allow_indefinite")) {
        if (!j["allow_indefinite"].is_boolean()) bad("allow_indefinite", "expected a boolean");
        c.allow_indefinite = j["allow_indefinite"].get<bool>();
    }
    return c;
}

json config_to_json(const MarketConfig& c) {
    json j;
    j["mu"] = to_json(c.mu);
    j["alpha"] = to_json(c.alpha);
    j["B"] = c.B;
    if (c.cov) j["cov"] = to_json(*c.cov);
    if (c.sd) j["sd"] = to_json(*c.sd);
    if (c.corr) j["corr"] = to_json(*c.corr);
    if (c.h) j["h"] = *c.h;
    if (c.seed) j["seed"] = *c.seed;
    if (c.init_weights) j["init_weights"] = *c.init_weights;
    if (c.samples) j["samples"] = *c.samples;
    if (c.grid) j["grid"] = *c.grid;
    if (c.max_iter) j["max_iter"] = *c.max_iter;
    if (c.allow_indefinite) j["allow_indefinite"] = true;
    return j;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::ParseError, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(Errc::ParseError, path + ": " + e.what());
    }
}

MarketConfig load_config(const std::string& path) { return parse_config(read_json_file(path)); }

Market build_market(const MarketConfig& c) {
    Mat cov = c.cov ? *c.cov : Mat();
    if (!c.cov) {
        if (c.sd->size() != c.mu.size() || c.corr->rows() != c.mu.size() ||
            c.corr->cols() != c.mu.size())
            throw Error(Errc::DimensionMismatch, "sd/corr do not match mu");
        cov = cov_from_sd_corr(*c.sd, *c.corr);
    }
    ValidateOptions opt;
    opt.allow_indefinite = c.allow_indefinite;
    return validate_market(c.mu, cov, c.alpha, c.B, opt);
}

WeightMatrix load_weights(const std::string& path) {
    const json j = read_json_file(path);
    const json& w = j.is_object() ? j.at("weights") : j;
    return WeightMatrix(parse_matrix(w, "weights"));
}

WeightMatrix initial_weights(const MarketConfig& c, int h, std::uint64_t seed) {
    const int n = static_cast<int>(c.mu.size());
    if (!c.init_weights || *c.init_weights == "random") return random_weights(n, h, splitmix64(seed));
    if (*c.init_weights == "uniform") return WeightMatrix(Mat::Constant(n, h, 1.0 / h));
    WeightMatrix w(parse_matrix(*c.init_weights, "init_weights"));
    if (w.n() != n || w.h() != h) throw Error(Errc::DimensionMismatch, "init_weights shape");
    return w;
}

namespace {

json blocks_json(const Partition& p) {
    json b = json::array();
    for (const auto& blk : p.blocks()) {
        json m = json::array();
        for (int i : blk) m.push_back(i + 1);
        b.push_back(m);
    }
    return b;
}

json members_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(static_cast<int>(x) + 1);
    return a;
}

} // namespace

json allocation_json(const Market& m, const Partition& p) {
    const auto r = allocation_disjoint(m, p);
    json j;
    j["mode"] = "disjoint";
    j["partition"] = p.str();
    j["blocks"] = blocks_json(p);
    j["rho"] = to_json(r.rho);
    j["d"] = to_json(r.d);
    j["total"] = r.total;
    j["beta_m"] = to_json(r.beta_m);
    j["beta"] = r.beta;
    // best unilateral deviation per bank: >= 0 everywhere means Nash
    json dev = json::array();
    for (int k = 0; k < m.n(); ++k) {
        auto lab = std::vector<int>(m.n());
        for (int i = 0; i < m.n(); ++i) lab[i] = p.block_of(i);
        double best = std::numeric_limits<double>::infinity();
        const bool alone = p.block(p.block_of(k)).size() == 1;
        for (int b = 0; b <= p.size(); ++b) {
            if (b == p.block_of(k) || (b == p.size() && alone)) continue;
            lab[k] = b;
            best = std::min(best, allocation_bank(m, Partition::from_labels(lab), k) - r.rho(k));
        }
        dev.push_back(std::isfinite(best) ? json(best) : json(nullptr));
    }
    j["best_deviation_gain"] = dev;
    j["nash"] = is_nash_disjoint(m, p);
    return j;
}

json allocation_json(const Market& m, const WeightMatrix& w) {
    const auto r = allocation_overlap(m, w);
    json j;
    j["mode"] = "overlap";
    j["weights"] = to_json(w.w());
    j["rho_ij"] = to_json(r.rho_ij);
    j["rho"] = to_json(r.rho);
    j["d"] = to_json(r.d);
    j["total"] = r.total;
    j["beta_j"] = to_json(r.beta_j);
    j["beta"] = r.beta;
    return j;
}

json result_json(const EquilibriumResult& r) {
    json j;
    j["mode"] = r.overlap ? "overlap" : "disjoint";
    if (r.overlap)
        j["terminal"] = to_json(r.weights.w());
    else {
        j["terminal"] = r.partition.str();
        j["blocks"] = blocks_json(r.partition);
    }
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["seed"] = r.seed;
    json t = json::array();
    for (const auto& mv : r.trajectory) {
        json e;
        e["bank"] = mv.bank + 1;
        if (r.overlap) {
            e["from"] = mv.from;
            e["to"] = mv.to;
        } else {
            e["from"] = members_json(mv.from);
            e["to"] = members_json(mv.to);
        }
        e["delta"] = mv.delta;
        t.push_back(e);
    }
    j["trajectory"] = t;
    return j;
}

PriceEstimate estimate_prices(std::istream& in) {
    PriceEstimate e;
    std::string line;
    if (!std::getline(in, line)) throw Error(Errc::TooFewRows, "empty price table");
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            while (!tok.empty() && (tok.back() == '\r' || tok.back() == ' ')) tok.pop_back();
            while (!tok.empty() && tok.front() == ' ') tok.erase(tok.begin());
            out.push_back(tok);
        }
        return out;
    };
    const auto head = split(line);
    if (head.size() < 2) throw Error(Errc::ParseError, "need a date column and at least one series");
    e.names.assign(head.begin() + 1, head.end());
    const std::size_t k = e.names.size();
    std::vector<std::vector<double>> px;
    std::string prev_date;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split(line);
        if (f.size() != k + 1)
            throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": expected " +
                                              std::to_string(k + 1) + " fields");
        if (!prev_date.empty() && !(prev_date < f[0]))
            throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": dates not ascending");
        prev_date = f[0];
        std::vector<double> row(k);
        for (std::size_t c = 0; c < k; ++c) {
            if (f[c + 1].empty())
                throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": gap in " + e.names[c]);
            std::size_t pos = 0;
            try {
                row[c] = std::stod(f[c + 1], &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != f[c + 1].size())
                throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": bad price '" + f[c + 1] + "'");
            if (!(row[c] > 0))
                throw Error(Errc::NonPositivePrice, "line " + std::to_string(lineno) + ", " + e.names[c]);
        }
        px.push_back(std::move(row));
    }
    if (px.size() < 3) throw Error(Errc::TooFewRows, "need at least 3 price rows");
    const int T = static_cast<int>(px.size()) - 1;
    Mat r(T, k);
    for (int t = 0; t < T; ++t)
        for (std::size_t c = 0; c < k; ++c) r(t, c) = std::log(px[t + 1][c] / px[t][c]);
    const Eigen::RowVectorXd mean = r.colwise().mean();
    const Mat ctr = r.rowwise() - mean;
    const Mat cov = ctr.transpose() * ctr / (T - 1);
    e.sd = cov.diagonal().cwiseSqrt();
    for (std::size_t c = 0; c < k; ++c)
        if (!(e.sd(c) > 0)) throw Error(Errc::ZeroVariance, "series " + e.names[c] + " has zero variance; correlation undefined");
    e.corr = e.sd.cwiseInverse().asDiagonal() * cov * e.sd.cwiseInverse().asDiagonal();
    e.corr.diagonal().setOnes();
    e.returns = T;
    return e;
}

json estimate_json(const PriceEstimate& e) {
    json j;
    j["names"] = e.names;
    j["sd"] = to_json(e.sd);
    j["corr"] = to_json(e.corr);
    j["returns"] = e.returns;
    j["convention"] = "daily log-returns, full-sample moments, n-1 denominator";
    return j;
}

Shock parse_shock(const std::string& spec, const Market& m) {
    const int n = m.n();
    if (spec == "x") return Shock::identity(m);
    if (spec.rfind("x:", 0) == 0) {
        int k = 0;
        try {
            k = std::stoi(spec.substr(2));
        } catch (const std::exception&) {
            throw Error(Errc::ParseError, "bad shock index in '" + spec + "'");
        }
        if (k < 1 || k > n) throw Error(Errc::ParseError, "shock index out of range");
        --k;
        Vec mean = Vec::Zero(n);
        mean(k) = m.mu(k);
        Mat cov = Mat::Zero(n, n), cross = Mat::Zero(n, n);
        cov(k, k) = m.sigma(k, k);
        cross.col(k) = m.sigma.col(k);
        return Shock::gaussian(mean, cov, cross);
    }
    if (spec.rfind("fixed:", 0) == 0) {
        std::vector<double> z;
        std::stringstream ss(spec.substr(6));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                z.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw Error(Errc::ParseError, "bad shock value '" + tok + "'");
            }
        }
        if (static_cast<int>(z.size()) != n) throw Error(Errc::ParseError, "shock needs " + std::to_string(n) + " values");
        return Shock::fixed(Eigen::Map<Vec>(z.data(), n));
    }
    const json j = read_json_file(spec);
    Vec mean = parse_vector(j.at("mean"), "mean");
    if (mean.size() != n) throw Error(Errc::DimensionMismatch, "shock mean length");
    if (!j.contains("cov") && !j.contains("cross")) return Shock::fixed(mean);
    return Shock::gaussian(mean, parse_matrix(j.at("cov"), "cov"), parse_matrix(j.at("cross"), "cross"));
}

namespace {

bool within(const Estimate& e, double exact) {
    return std::abs(e.value - exact) <= 4 * e.se + 1e-9 * std::max(1.0, std::abs(exact));
}

json comparison(const std::string& what, const Estimate& e, double exact) {
    json c;
    c["quantity"] = what;
    c["closed_form"] = exact;
    c["estimate"] = e.value;
    c["std_error"] = e.se;
    c["pass"] = within(e, exact);
    return c;
}

Vec member_col(const WeightMatrix& w, int j) {
    Vec c = Vec::Zero(w.n());
    for (int i = 0; i < w.n(); ++i)
        if (w.member(i, j)) c(i) = w(i, j);
    return c;
}

} // namespace

json validate(const Market& m, const WeightMatrix& w, int samples, std::uint64_t seed, double d_shift) {
    const Mat X = sample_X(m, samples, seed);
    const auto rep = allocation_overlap(m, w);
    json comps = json::array();
    for (int j = 0; j < w.h(); ++j) {
        if (rep.beta_j(j) <= 0) continue;
        const Vec a = member_col(w, j);
        const double bj = rep.beta_j(j);
        const auto tm = tilted_moments(m, a, bj);
        const Vec S = X.transpose() * a;
        const Vec e = (-S / bj).array().exp().matrix();
        const std::string g = "group " + std::to_string(j + 1);
        comps.push_back(comparison(g + " z0", mean_estimate(e), tm.z0));
        comps.push_back(comparison(g + " s1", mean_estimate(S.cwiseProduct(e)), tm.s1));
        for (int i = 0; i < m.n(); ++i) {
            if (!w.member(i, j)) continue;
            const Vec xi = X.row(i).transpose();
            const std::string b = g + " bank " + std::to_string(i + 1);
            comps.push_back(comparison(b + " xi", mean_estimate(xi.cwiseProduct(e)), tm.xi(i)));
            const Vec y = -w(i, j) * xi + (S.array() + rep.d(j)).matrix() / (m.alpha(i) * bj);
            comps.push_back(comparison(b + " rho", tilted_estimate(X, a, bj, y), rep.rho_ij(i, j)));
        }
    }
    const auto bc = budget_check(m, w, X, d_shift);
    comps.push_back(comparison("budget", bc, m.budget));
    bool ok = true;
    for (const auto& c : comps) ok = ok && c["pass"].get<bool>();
    json j;
    j["samples"] = samples;
    j["seed"] = seed;
    j["chunk_size"] = kChunkSize;
    if (d_shift != 0) j["d_shift"] = d_shift;
    j["comparisons"] = comps;
    j["pass"] = ok;
    return j;
}

json sensitivity(const Market& m, const WeightMatrix& w, const Shock& z, bool fd_check) {
    const double h = 1e-5;
    const auto rep = allocation_overlap(m, w);
    json groups = json::array();
    for (int j = 0; j < w.h(); ++j) {
        if (rep.beta_j(j) <= 0) continue;
        const Vec a = member_col(w, j);
        const double bj = rep.beta_j(j);
        json g;
        g["group"] = j + 1;
        g["marginal_group_risk"] = marginal_group_risk(m, w, j, z);
        if (fd_check) {
            auto dj = [&](double eps) {
                return group_constant_entry(perturbed_market(m, z, eps), a, bj, rep.beta);
            };
            const double fd = (dj(h) - dj(-h)) / (2 * h);
            g["marginal_group_risk_fd"] = fd;
            g["marginal_group_risk_absdiff"] = std::abs(fd - g["marginal_group_risk"].get<double>());
        }
        json banks = json::array();
        const double qS = a.dot(m.mu) - a.dot(m.sigma * a) / bj;
        const double qSZ = a.dot(z.mean) - a.dot(z.cross * a) / bj;
        for (int i = 0; i < m.n(); ++i) {
            if (!w.member(i, j)) continue;
            json b;
            b["bank"] = i + 1;
            b["marginal_risk_allocation"] = marginal_risk_allocation(m, w, i, j, z);
            b["local_causal_responsibility"] = local_causal_responsibility(m, w, i, j, z);
            b["weight_sensitivity"] = weight_sensitivity(m, w, i, j);
            if (fd_check) {
                auto entry = [&](double eps) {
                    return allocation_entry(perturbed_market(m, z, eps), a, i, bj, rep.beta);
                };
                // tilt frozen at eps = 0, only the argument of Y moves
                auto frozen = [&](double eps) {
                    const double qxi = m.mu(i) - m.sigma.row(i).dot(a) / bj;
                    const double qzi = z.mean(i) - z.cross.col(i).dot(a) / bj;
                    const double d = group_constant_entry(perturbed_market(m, z, eps), a, bj, rep.beta);
                    return -w(i, j) * (qxi + eps * qzi) + (qS + eps * qSZ + d) / (m.alpha(i) * bj);
                };
                auto wfun = [&](double dw) {
                    Vec c = a;
                    c(i) += dw;
                    return allocation_entry(m, c, i, bj, rep.beta);
                };
                const double f1 = (entry(h) - entry(-h)) / (2 * h);
                const double f2 = (frozen(h) - frozen(-h)) / (2 * h);
                const double f3 = (wfun(h) - wfun(-h)) / (2 * h);
                b["marginal_risk_allocation_fd"] = f1;
                b["local_causal_responsibility_fd"] = f2;
                b["weight_sensitivity_fd"] = f3;
                b["marginal_risk_allocation_absdiff"] = std::abs(f1 - b["marginal_risk_allocation"].get<double>());
                b["local_causal_responsibility_absdiff"] = std::abs(f2 - b["local_causal_responsibility"].get<double>());
                b["weight_sensitivity_absdiff"] = std::abs(f3 - b["weight_sensitivity"].get<double>());
            }
            banks.push_back(b);
        }
        g["banks"] = banks;
        groups.push_back(g);
    }
    json j;
    j["shock_deterministic"] = z.deterministic;
    j["groups"] = groups;
    if (fd_check) j["fd_step"] = h;
    return j;
}

Market claim4_market(double rho) {
    Mat c = Mat::Identity(4, 4);
    c(0, 1) = c(1, 0) = c(2, 3) = c(3, 2) = rho;
    return validate_market(Vec::Zero(4), c, Vec::Ones(4), -1.0);
}

Market claim5_market(double rho) {
    Mat c = Mat::Identity(5, 5);
    c(0, 1) = c(1, 0) = rho;
    for (int a = 2; a < 5; ++a)
        for (int b = 2; b < 5; ++b)
            if (a != b) c(a, b) = rho;
    // rho < -1/2 makes the 3-block indefinite; the fixture still covers it
    return validate_market(Vec::Zero(5), c, Vec::Ones(5), -1.0, {true});
}

Market equicorr_market(int n, double rho) {
    Mat c = Mat::Constant(n, n, rho);
    c.diagonal().setOnes();
    return validate_market(Vec::Zero(n), c, Vec::Ones(n), -1.0);
}

namespace {

Mat rows(std::initializer_list<std::initializer_list<double>> r) {
    Mat m(r.size(), r.begin()->size());
    int i = 0;
    for (const auto& row : r) {
        int j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

Vec vec(std::initializer_list<double> v) {
    Vec out(v.size());
    int i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

Mat corr_43() {
    Mat c = Mat::Identity(10, 10);
    auto set = [&](int a, int b, double v) { c(a, b) = c(b, a) = v; };
    const int core = 3, core2 = 4;
    const std::vector<int> p = {0, 1, 2}, pp = {5, 6, 7, 8, 9};
    for (int a : p) {
        for (int b : p)
            if (a != b) set(a, b, -.25);
        set(a, core, -.12);
        set(a, core2, -.09);
        for (int b : pp) set(a, b, .05);
    }
    for (int a : pp) {
        for (int b : pp)
            if (a != b) set(a, b, -.25);
        set(a, core, -.09);
        set(a, core2, -.12);
    }
    set(core, core2, .7);
    return c;
}

} // namespace

MarketConfig example_config(const std::string& id) {
    MarketConfig c;
    if (id == "4.1") {
        // sigma and B are not given; Nash comparisons do not depend on them
        c.mu = Vec::Constant(4, 10.0);
        c.alpha = Vec::Ones(4);
        c.B = -1;
        c.sd = Vec::Ones(4);
        c.corr = rows({{1, .4, 0, 0}, {.4, 1, .05, 0}, {0, .05, 1, .4}, {0, 0, .4, 1}});
    } else if (id == "4.2") {
        c.mu = vec({1, 1, 1, 2, 2, 3, 6, 6, 6, 7});
        c.sd = vec({4, 2.8, 1.6, 1, 3.8, 2.8, 0.9, 1.1, 4.2, 1.8});
        c.alpha = vec({0.4, 1.2, 1.8, 2.2, 0.4, 0.9, 2.8, 2.2, 0.4, 1.9});
        c.B = -8;
        Mat corr = Mat::Constant(10, 10, 0.8);
        corr.diagonal().setOnes();
        corr(0, 8) = corr(8, 0) = -0.3;
        c.corr = corr;
        c.h = 2;
        c.init_weights = json::array();
        for (int i = 0; i < 10; ++i) c.init_weights->push_back({0.3, 0.7});
        c.allow_indefinite = true;
    } else if (id == "4.3") {
        c.mu = vec({1, 1, 2, 2, 3, 4, 5, 5, 6, 7});
        c.sd = vec({4, 2.8, 2.2, 1.7, 1.4, 3.2, 3.8, 1.9, 4.2, 2.5});
        c.alpha = vec({0.4, 1, 1.1, 2.2, 2.8, 0.9, 0.8, 1.4, 0.6, 1.3});
        c.B = -8;
        c.corr = corr_43();
        c.h = 2;
        c.init_weights = "random";
        c.seed = example_seed(id);
        c.allow_indefinite = true;
    } else if (id == "4.4") {
        c.mu = Vec::Zero(6);
        c.sd = vec({.262, .245, .235, .264, .236, .233});
        c.alpha = vec({2, 1.8, 1.7, 1.9, 1.2, 0.85});
        c.B = -8;
        c.corr = rows({{1, .82, .61, .87, -.27, .86},
                       {.82, 1, .86, .83, .04, .79},
                       {.61, .86, 1, .65, .25, .60},
                       {.87, .83, .65, 1, -.35, .89},
                       {-.27, .04, .25, -.35, 1, -.24},
                       {.86, .79, .60, .89, -.24, 1}});
        c.h = 2;
        c.init_weights = "random";
        c.seed = example_seed(id);
    } else {
        throw Error(Errc::UnknownExample, "no parameter set for '" + id + "'");
    }
    return c;
}

Mat printed_matrix(const std::string& id) {
    auto two = [](std::initializer_list<double> first) {
        Mat m(first.size(), 2);
        int i = 0;
        for (double v : first) {
            m(i, 0) = v;
            m(i, 1) = 1 - v;
            ++i;
        }
        return m;
    };
    if (id == "4.2") return two({1, .51, .48, .44, 0, .49, .44, .45, 1, .49});
    if (id == "4.3") return two({1, 1, 1, .46, .32, 0, 0, 0, 0, 0});
    if (id == "4.4") return two({.73, .61, .56, .54, 1, 0});
    throw Error(Errc::UnknownExample, "no printed matrix for '" + id + "'");
}

std::uint64_t example_seed(const std::string& id) {
    if (id == "4.3") return 7;
    if (id == "4.4") return 1;
    return 0;
}

std::vector<std::string> example_ids() { return {"2.5a", "2.5b", "2.5c", "4.1", "4.2", "4.3", "4.4"}; }

namespace {

struct Checks {
    json list = json::array();
    bool ok = true;
    void add(const std::string& name, bool pass, json detail = nullptr) {
        json c;
        c["check"] = name;
        c["pass"] = pass;
        if (!detail.is_null()) c["detail"] = std::move(detail);
        list.push_back(c);
        ok = ok && pass;
    }
};

json partitions_json(const std::vector<Partition>& ps) {
    json a = json::array();
    for (const auto& p : ps) a.push_back(p.str());
    return a;
}

bool contains(const std::vector<Partition>& ps, const std::string& s) {
    return std::any_of(ps.begin(), ps.end(), [&](const Partition& p) { return p.str() == s; });
}

} // namespace

json reproduce(const std::string& id) {
    Checks ck;
    const double e = 1e-4;
    if (id == "2.5a") {
        const double lo = -3.0 / 13, hi = 3.0 / 8;
        const auto p12 = parse_partition("1,2|3,4", 4), p13 = parse_partition("1,3|2,4", 4);
        ck.add("{1,2}|{3,4} Nash just below -3/13", is_nash_disjoint(claim4_market(lo - e), p12));
        ck.add("{1,2}|{3,4} not Nash just above -3/13", !is_nash_disjoint(claim4_market(lo + e), p12));
        ck.add("{1,3}|{2,4} not Nash just below 3/8", !is_nash_disjoint(claim4_market(hi - e), p13));
        ck.add("{1,3}|{2,4} Nash just above 3/8", is_nash_disjoint(claim4_market(hi + e), p13));
        const auto at05 = brute_force_nash_disjoint(claim4_market(0.5));
        ck.add("rho=0.5 lists {1,3}|{2,4} and {1,4}|{2,3}",
               contains(at05, "1,3|2,4") && contains(at05, "1,4|2,3"), partitions_json(at05));
        const auto at0 = brute_force_nash_disjoint(claim4_market(0.0));
        ck.add("rho=0 has only the single group", at0.size() == 1 && at0[0].size() == 1,
               partitions_json(at0));
    } else if (id == "2.5b") {
        const auto p = parse_partition("1,2|3,4,5", 5), q = parse_partition("1,2,3|4,5", 5);
        ck.add("{1,2}|{3,4,5} Nash at rho=-0.3", is_nash_disjoint(claim5_market(-0.3), p));
        ck.add("{1,2}|{3,4,5} not Nash at rho=-0.28", !is_nash_disjoint(claim5_market(-0.28), p));
        for (double r : {-0.9, -0.5, 0.0, 0.5, 0.9})
            ck.add("{1,2,3}|{4,5} not Nash at rho=" + std::to_string(r), !is_nash_disjoint(claim5_market(r), q));
        const auto bf = brute_force_nash_disjoint(claim5_market(-0.5));
        ck.add("rho=-0.5 brute force contains {1,2}|{3,4,5}", contains(bf, "1,2|3,4,5"), partitions_json(bf));
    } else if (id == "2.5c") {
        for (double r : {-0.2, 0.0, 0.3, 0.8}) {
            const auto bf = brute_force_nash_disjoint(equicorr_market(5, r));
            ck.add("equicorrelated rho=" + std::to_string(r) + " has only the single group",
                   bf.size() == 1 && bf[0].size() == 1, partitions_json(bf));
        }
    } else if (id == "4.1") {
        const auto m = build_market(example_config(id));
        const auto bf = brute_force_nash_disjoint(m);
        ck.add("Nash set is {single group, {1,3}|{2,4}}",
               bf.size() == 2 && contains(bf, "1,2,3,4") && contains(bf, "1,3|2,4"), partitions_json(bf));
    } else if (id == "4.2") {
        const auto cfg = example_config(id);
        const auto m = build_market(cfg);
        const Mat P = printed_matrix(id);
        const auto gaps = best_response_gaps(m, WeightMatrix(P));
        ck.add("printed matrix is a best response within 0.01", gaps.maxCoeff() <= 0.01, to_json(gaps));
        const WeightMatrix w0 = initial_weights(cfg, 2, 0);
        int hits = 0;
        json dist = json::array();
        for (std::uint64_t s = 1; s <= 100; ++s) {
            const auto r = fictitious_play_overlap(m, w0, s);
            const double d = distance_up_to_permutation(r.weights.w(), P);
            hits += r.converged && d <= 0.01;
            dist.push_back(d);
        }
        json det;
        det["matches"] = hits;
        det["distances"] = dist;
        ck.add("at least 90 of 100 seeds reach the printed matrix", hits >= 90, det);
    } else if (id == "4.3" || id == "4.4") {
        const auto cfg = example_config(id);
        const auto m = build_market(cfg);
        const Mat P = printed_matrix(id);
        const auto r = fictitious_play_overlap(m, initial_weights(cfg, 2, *cfg.seed), *cfg.seed);
        ck.add("dynamics converged", r.converged);
        const double d = distance_up_to_permutation(r.weights.w(), P);
        json det;
        det["terminal"] = to_json(r.weights.w());
        det["distance"] = d;
        det["seed"] = *cfg.seed;
        if (id == "4.3") {
            Mat W = r.weights.w();
            if (W(0, 0) < W(0, 1)) W.col(0).swap(W.col(1));
            bool periph = true;
            for (int i : {0, 1, 2}) periph = periph && W(i, 0) == 1.0;
            for (int i : {5, 6, 7, 8, 9}) periph = periph && W(i, 1) == 1.0;
            ck.add("peripheral banks stay on their side", periph, det);
            ck.add("core banks split", W(3, 0) > 0 && W(3, 0) < 1 && W(4, 0) > 0 && W(4, 0) < 1);
        }
        ck.add("terminal matches printed matrix within 0.01", d <= 0.01, det);
        const auto gaps = best_response_gaps(m, WeightMatrix(P));
        ck.add("printed matrix is a best response within 0.01", gaps.maxCoeff() <= 0.01, to_json(gaps));
    } else {
        throw Error(Errc::UnknownExample, "unknown example '" + id + "'");
    }
    json j;
    j["example"] = id;
    j["checks"] = ck.list;
    j["pass"] = ck.ok;
    return j;
}

} // namespace sysrisk::app
