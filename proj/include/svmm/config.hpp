#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <svmm/experiments.hpp>
#include <svmm/model.hpp>
#include <svmm/simulate.hpp>

namespace svmm {

/// `key = value` lines with `#` comments. Later assignments override earlier ones.
class Config {
public:
    [[nodiscard]] static Config parse(std::string_view text, const std::string& source = "<config>");
    [[nodiscard]] static Config load(const std::string& path);

    [[nodiscard]] bool has(const std::string& key) const;
    [[nodiscard]] std::optional<std::string> raw(const std::string& key) const;
    [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const;
    [[nodiscard]] double get_double(const std::string& key, double fallback) const;
    [[nodiscard]] double require_double(const std::string& key) const;
    [[nodiscard]] std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;
    void set(const std::string& key, const std::string& value);

    [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

    /// Keys matching none of `known`; an entry ending in '*' matches any key with that prefix.
    [[nodiscard]] std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

private:
    std::string source_;
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// Keys understood by model_from_config / grid_from_config / simulation_options_from_config.
[[nodiscard]] const std::vector<std::string>& model_config_keys();
/// Keys understood by experiment_from_config.
[[nodiscard]] const std::vector<std::string>& experiment_config_keys();

/// Model names used on the command line: heston, svj-return, svj-variance, two-factor.
[[nodiscard]] std::string model_cli_name(const ModelSpec& model);

/// Builds a model from `setting` (a built-in name) and/or explicit parameter keys. The
/// override, when given, replaces the `model` key.
[[nodiscard]] ModelSpec model_from_config(const Config& config, const std::optional<std::string>& model_override = {});
[[nodiscard]] SamplingGrid grid_from_config(const Config& config);
[[nodiscard]] SimulationOptions simulation_options_from_config(const Config& config);

/// settings = S0,S4 ; setting.NAME = mu,k,theta,sigma_v,rho ; N = 25000,100000 ; h = 1 ; ...
[[nodiscard]] ExperimentSpec experiment_from_config(const Config& config);

/// `index,log_return[,variance]` with 17 significant digits.
[[nodiscard]] std::string returns_csv(const PathBundle& path);

/// Reads the `log_return` column (or the only column) of a CSV file.
[[nodiscard]] ReturnSeries read_returns_csv(const std::string& path, double h);
/// Reads the `price` column (or the last column) of a CSV file.
[[nodiscard]] std::vector<double> read_prices_csv(const std::string& path);

} // namespace svmm
