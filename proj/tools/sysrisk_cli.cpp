#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "sysrisk/app.hpp"

using namespace sysrisk;
using app::json;

namespace {

constexpr int kInputError = 2;
constexpr int kNotConverged = 3;
constexpr int kValidationFailed = 4;

struct Args {
    std::string config, example, mode = "disjoint", method = "play", partition, weights, shock = "x";
    std::string prices, out;
    int h = 0, seeds = 1, samples = 0, grid = 0, max_iter = 0;
    std::uint64_t seed = 0;
    bool seed_given = false, fd_check = false;
    double perturb_d = 0;
};

void emit(const Args& a, const json& j) {
    const std::string s = j.dump(2) + "\n";
    if (a.out.empty()) {
        std::cout << s;
        return;
    }
    std::ofstream f(a.out);
    if (!f) throw Error(Errc::ParseError, "cannot write " + a.out);
    f << s;
}

app::MarketConfig config_of(const Args& a) {
    if (!a.config.empty()) return app::load_config(a.config);
    if (!a.example.empty()) return app::example_config(a.example);
    throw Error(Errc::ParseError, "--config (or --example) is required");
}

int h_of(const Args& a, const app::MarketConfig& c) { return a.h > 0 ? a.h : c.h.value_or(2); }

std::uint64_t seed_of(const Args& a, const app::MarketConfig& c) {
    return a.seed_given ? a.seed : c.seed.value_or(0);
}

PlayOptions play_of(const Args& a, const app::MarketConfig& c) {
    PlayOptions o;
    o.max_iter = a.max_iter > 0 ? a.max_iter : c.max_iter.value_or(o.max_iter);
    o.grid = a.grid > 0 ? a.grid : c.grid.value_or(o.grid);
    return o;
}

// strategy from --partition or --weights, as a weight matrix
WeightMatrix strategy_of(const Args& a, const Market& m, int h) {
    if (!a.weights.empty()) {
        auto w = app::load_weights(a.weights);
        if (w.n() != m.n()) throw Error(Errc::DimensionMismatch, "weights have wrong number of rows");
        return w;
    }
    if (!a.partition.empty()) {
        const auto p = parse_partition(a.partition, m.n());
        return WeightMatrix::from_partition(p, std::max(h, p.size()));
    }
    throw Error(Errc::ParseError, "--partition or --weights is required");
}

json echo(const Args& a, const app::MarketConfig& c) {
    json e;
    e["config"] = app::config_to_json(c);
    if (!a.config.empty()) e["config_path"] = a.config;
    if (!a.example.empty()) e["example"] = a.example;
    if (!a.partition.empty()) e["partition"] = a.partition;
    if (!a.weights.empty()) e["weights_path"] = a.weights;
    return e;
}

int cmd_allocate(const Args& a) {
    const auto c = config_of(a);
    const auto m = app::build_market(c);
    json j;
    // a weight file alone means overlap
    const bool disjoint = a.mode == "disjoint" && (!a.partition.empty() || a.weights.empty());
    if (disjoint) {
        if (a.partition.empty()) throw Error(Errc::ParseError, "disjoint mode needs --partition");
        j = app::allocation_json(m, parse_partition(a.partition, m.n()));
    } else {
        if (!a.partition.empty() && a.weights.empty())
            throw Error(Errc::ParseError, "overlap mode needs --weights");
        j = app::allocation_json(m, strategy_of(a, m, h_of(a, c)));
    }
    j["input"] = echo(a, c);
    j["seed"] = seed_of(a, c);
    emit(a, j);
    return 0;
}

int cmd_nash(const Args& a) {
    const auto c = config_of(a);
    const auto m = app::build_market(c);
    json j;
    j["input"] = echo(a, c);
    j["mode"] = a.mode;
    j["method"] = a.method;
    if (a.method == "brute") {
        if (a.mode != "disjoint") throw Error(Errc::ParseError, "brute force is disjoint-only");
        json eq = json::array();
        for (const auto& p : brute_force_nash_disjoint(m)) eq.push_back(p.str());
        j["equilibria"] = eq;
        emit(a, j);
        return 0;
    }
    const int h = h_of(a, c);
    const auto opt = play_of(a, c);
    const std::uint64_t base = seed_of(a, c);
    json runs = json::array();
    std::set<std::string> seen;
    json terminals = json::array();
    bool all_converged = true;
    for (int s = 0; s < a.seeds; ++s) {
        const std::uint64_t seed = base + s;
        const auto r = a.mode == "disjoint"
                           ? fictitious_play_disjoint(m, seed, opt)
                           : fictitious_play_overlap(m, app::initial_weights(c, h, seed), seed, opt);
        all_converged = all_converged && r.converged;
        json rj = app::result_json(r);
        const std::string key = rj["terminal"].dump();
        if (seen.insert(key).second) terminals.push_back(rj["terminal"]);
        runs.push_back(std::move(rj));
    }
    j["runs"] = runs;
    j["distinct_terminals"] = terminals;
    j["converged"] = all_converged;
    emit(a, j);
    return all_converged ? 0 : kNotConverged;
}

int cmd_validate(const Args& a) {
    const auto c = config_of(a);
    const auto m = app::build_market(c);
    const auto w = strategy_of(a, m, h_of(a, c));
    const int samples = a.samples > 0 ? a.samples : c.samples.value_or(1000000);
    json j = app::validate(m, w, samples, seed_of(a, c), a.perturb_d);
    j["input"] = echo(a, c);
    emit(a, j);
    return j["pass"].get<bool>() ? 0 : kValidationFailed;
}

int cmd_sensitivity(const Args& a) {
    const auto c = config_of(a);
    const auto m = app::build_market(c);
    const auto w = strategy_of(a, m, h_of(a, c));
    json j = app::sensitivity(m, w, app::parse_shock(a.shock, m), a.fd_check);
    j["shock"] = a.shock;
    j["input"] = echo(a, c);
    emit(a, j);
    return 0;
}

int cmd_estimate(const Args& a) {
    std::ifstream in(a.prices);
    if (!in) throw Error(Errc::ParseError, "cannot open " + a.prices);
    emit(a, app::estimate_json(app::estimate_prices(in)));
    return 0;
}

int cmd_reproduce(const Args& a) {
    if (a.example.empty() || a.example == "all") {
        json all = json::array();
        bool ok = true;
        for (const auto& id : app::example_ids()) {
            auto r = app::reproduce(id);
            ok = ok && r["pass"].get<bool>();
            all.push_back(std::move(r));
        }
        json j;
        j["examples"] = all;
        j["pass"] = ok;
        emit(a, j);
        return ok ? 0 : kValidationFailed;
    }
    const json j = app::reproduce(a.example);
    emit(a, j);
    return j["pass"].get<bool>() ? 0 : kValidationFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Systemic risk allocation for bank groups and CCPs"};
    cli.set_help_flag("--help", "print help");  // -h would clash with --h
    cli.require_subcommand(1);
    Args a;

    auto market_opts = [&](CLI::App* s) {
        s->add_option("--config", a.config, "market config (JSON)");
        s->add_option("--example", a.example, "use an embedded example parameter set (4.1 .. 4.4)");
        s->add_option("--out", a.out, "write JSON here instead of stdout");
        s->add_option("--h", a.h, "number of groups (overlap mode)")->check(CLI::PositiveNumber);
        s->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) {
            a.seed = v;
            a.seed_given = true;
        }, "random seed");
    };
    auto strategy_opts = [&](CLI::App* s) {
        s->add_option("--partition", a.partition, "disjoint grouping, e.g. \"1,3|2,4\"");
        s->add_option("--weights", a.weights, "weight matrix JSON file");
    };

    auto* alloc = cli.add_subcommand("allocate", "fair allocation for a given grouping");
    market_opts(alloc);
    strategy_opts(alloc);
    alloc->add_option("--mode", a.mode)->check(CLI::IsMember({"disjoint", "overlap"}));

    auto* nash = cli.add_subcommand("nash", "search for Nash equilibria");
    market_opts(nash);
    nash->add_option("--mode", a.mode)->check(CLI::IsMember({"disjoint", "overlap"}));
    nash->add_option("--method", a.method)->check(CLI::IsMember({"brute", "play"}));
    nash->add_option("--seeds", a.seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
    nash->add_option("--grid", a.grid)->check(CLI::PositiveNumber);
    nash->add_option("--max-iter", a.max_iter)->check(CLI::PositiveNumber);

    auto* val = cli.add_subcommand("validate", "closed forms against Monte Carlo");
    market_opts(val);
    strategy_opts(val);
    val->add_option("--samples", a.samples)->check(CLI::Range(2, 1 << 30));
    val->add_option("--perturb-d", a.perturb_d, "shift every group constant (negative control)");

    auto* sens = cli.add_subcommand("sensitivity", "derivatives of the overlap allocation");
    market_opts(sens);
    strategy_opts(sens);
    sens->add_option("--shock", a.shock, "fixed:z1,..,zn | x | x:k | shock JSON file");
    sens->add_flag("--fd-check", a.fd_check, "add central finite differences");

    auto* est = cli.add_subcommand("estimate", "sd and correlation from a price table");
    est->add_option("--prices", a.prices, "CSV: date, one price column per bank")->required();
    est->add_option("--out", a.out);

    auto* rep = cli.add_subcommand("reproduce", "check an embedded example");
    rep->add_option("--example", a.example, "2.5a 2.5b 2.5c 4.1 4.2 4.3 4.4 or all");
    rep->add_option("--out", a.out);

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = cli.exit(e);
        return rc == 0 ? 0 : kInputError;
    }

    try {
        if (*alloc) return cmd_allocate(a);
        if (*nash) return cmd_nash(a);
        if (*val) return cmd_validate(a);
        if (*sens) return cmd_sensitivity(a);
        if (*est) return cmd_estimate(a);
        if (*rep) return cmd_reproduce(a);
    } catch (const Error& e) {
        json err;
        err["error"] = errc_name(e.code());
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return e.code() == Errc::NotConverged ? kNotConverged : kInputError;
    }
    return 0;
}
