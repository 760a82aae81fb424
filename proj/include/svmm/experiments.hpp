#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <svmm/model.hpp>

namespace svmm {

struct NamedSetting {
    std::string name;
    HestonParams params;
};

/// S0 (mu 0.125, k 0.1, theta 0.25, sigma_v 0.1, rho -0.7) and the five one-parameter
/// variations S1..S5.
[[nodiscard]] const std::vector<NamedSetting>& builtin_settings();
[[nodiscard]] NamedSetting builtin_setting(const std::string& name);

struct ExperimentSpec {
    std::vector<NamedSetting> settings;
    std::vector<std::int64_t> N_list{100000};
    std::vector<double> h_list{1.0};
    int replications = 100;
    int substeps = 20;
    std::uint64_t master_seed = 1;
    int threads = 0;  ///< 0 uses the hardware concurrency
    int M = 10;  ///< lag depth for k; M = 2 is far noisier at N around 1e5
    bool with_stderr = false;
    std::vector<std::string> tables{"grid"};  ///< any of grid, scaling

    void validate() const;
};

/// Switches to 400 replications; single-N specs move to N = 400K, multi-N (scaling) specs
/// keep their N values.
[[nodiscard]] ExperimentSpec paper_scale(ExperimentSpec spec);

/// Parameter vectors are laid out as (mu, k, theta, sigma_v, rho) throughout this module.
using ParamArray = std::array<double, 5>;
inline constexpr std::array<const char*, 5> kParamNames{"mu", "k", "theta", "sigma_v", "rho"};

[[nodiscard]] ParamArray to_array(const HestonParams& p);

struct Replication {
    int index = 0;
    bool ok = false;
    ParamArray estimate{};
    std::optional<ParamArray> stderr_;
    std::string error;  ///< error name when !ok
    double estimate_seconds = 0.0;
};

struct CellReport {
    std::string setting;
    HestonParams truth;
    std::int64_t n = 0;
    double h = 1.0;
    int replications = 0;
    int n_failed = 0;
    ParamArray mean{};
    ParamArray std{};  ///< sample standard deviation (divisor reps - 1)
    std::vector<Replication> runs;  ///< in replication order, failures included
    double wall_time = 0.0;
    double mean_estimate_seconds = 0.0;

    [[nodiscard]] double failure_rate() const { return replications ? double(n_failed) / replications : 0.0; }
};

struct ReportTable {
    std::vector<CellReport> rows;  ///< settings x N_list x h_list, h fastest
    double wall_time = 0.0;
};

/// Mean and std over the successful runs.
void summarize(CellReport& cell);

/// Runs simulate -> mm_estimate for every cell and replication. Replication r of cell c uses
/// master_seed with stream index c * 2^32 + r, so the result does not depend on threads.
/// Throws AllReplicationsFailed when a cell has no successful replication.
[[nodiscard]] ReportTable run_experiment(const ExperimentSpec& spec);

struct ScalingRow {
    std::string setting;
    double h = 1.0;
    std::int64_t n_from = 0, n_to = 0;
    std::string parameter;
    double ratio = 0.0;     ///< std(n_from) / std(n_to)
    double expected = 0.0;  ///< sqrt(n_to / n_from)
    bool flagged = false;   ///< ratio off the expected value by more than a factor 1.6
    bool degenerate = false;
};

/// Std ratios between consecutive N (sorted) for each setting and h.
[[nodiscard]] std::vector<ScalingRow> scaling_analysis(const ReportTable& table);

/// "0.101±0.015": three decimals with trailing zeros dropped.
[[nodiscard]] std::string format_mean_std(double mean, double std);

[[nodiscard]] std::string grid_csv(const ReportTable& table);
[[nodiscard]] std::string scaling_csv(const std::vector<ScalingRow>& rows);
/// Human-readable block in the mean±std format. Timings appear only here, so the
/// CSV tables stay byte-identical across runs.
[[nodiscard]] std::string summary_text(const ReportTable& table);

} // namespace svmm
