#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sysrisk/equilibrium.hpp"
#include "sysrisk/mc.hpp"

namespace sysrisk::app {

using json = nlohmann::json;

struct MarketConfig {
    Vec mu;
    Vec alpha;
    double B = -1.0;
    std::optional<Mat> cov;
    std::optional<Vec> sd;
    std::optional<Mat> corr;
    std::optional<int> h;
    std::optional<std::uint64_t> seed;
    std::optional<json> init_weights;  // matrix, "uniform" or "random"
    std::optional<int> samples;
    std::optional<int> grid;
    std::optional<int> max_iter;
    bool allow_indefinite = false;
};

MarketConfig parse_config(const json& j);
json config_to_json(const MarketConfig& c);
MarketConfig load_config(const std::string& path);
Market build_market(const MarketConfig& c);

json read_json_file(const std::string& path);
Mat parse_matrix(const json& j, const std::string& field);
Vec parse_vector(const json& j, const std::string& field);
json to_json(const Vec& v);
json to_json(const Mat& m);

// {"weights": [[...]]} or a bare matrix
WeightMatrix load_weights(const std::string& path);
WeightMatrix initial_weights(const MarketConfig& c, int h, std::uint64_t seed);

json allocation_json(const Market& m, const Partition& p);
json allocation_json(const Market& m, const WeightMatrix& w);
json result_json(const EquilibriumResult& r);

struct PriceEstimate {
    std::vector<std::string> names;
    Vec sd;
    Mat corr;
    int returns = 0;
};
PriceEstimate estimate_prices(std::istream& csv);
json estimate_json(const PriceEstimate& e);

// "fixed:z1,..,zn" | "x" (Z = X) | "x:k" (Z = X^k e_k, 1-based) | path to a JSON
// file with mean/cov/cross
Shock parse_shock(const std::string& spec, const Market& m);

json validate(const Market& m, const WeightMatrix& w, int samples, std::uint64_t seed,
              double d_shift = 0.0);
json sensitivity(const Market& m, const WeightMatrix& w, const Shock& z, bool fd_check);

// embedded parameter sets
Market claim4_market(double rho);
Market claim5_market(double rho);
Market equicorr_market(int n, double rho);
MarketConfig example_config(const std::string& id);  // "4.1" .. "4.4"
Mat printed_matrix(const std::string& id);           // "4.2" .. "4.4"
std::uint64_t example_seed(const std::string& id);

std::vector<std::string> example_ids();
json reproduce(const std::string& id);

} // namespace sysrisk::app
