#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <svmm/model.hpp>

namespace svmm {

/// Log-returns y_i = log S_i - log S_{i-1} sampled every h.
struct ReturnSeries {
    double h = 1.0;
    std::vector<double> values;

    [[nodiscard]] std::int64_t size() const noexcept { return static_cast<std::int64_t>(values.size()); }
};

/// Checks N >= 3, finite values and h > 0.
void validate_series(const ReturnSeries& series);

struct PathBundle {
    ReturnSeries returns;
    std::optional<std::vector<double>> variance_path;  ///< v at the end of each interval
    std::uint64_t seed = 0;
    ModelSpec model;
};

/// Independent random streams of one replication.
enum class StreamRole : std::uint32_t { Wv = 1, Wv2 = 2, W = 3, Jumps = 4, Init = 5 };

using Rng = std::mt19937_64;

/// Generator for (master seed, replication, role), seeded through std::seed_seq.
[[nodiscard]] Rng make_stream(std::uint64_t master_seed, std::uint64_t replication, StreamRole role);

/// One draw from the stationary Gamma(2k theta / sigma^2, sigma^2 / (2k)) law. With
/// sigma_v = 0 the law is the point mass at theta.
[[nodiscard]] double draw_stationary_variance(const ValidatedHestonParams& params, Rng& rng);
[[nodiscard]] double draw_stationary_variance(const CirFactor& factor, Rng& rng);

struct SimulationOptions {
    std::uint64_t replication = 0;
    bool stationary_start = true;  ///< otherwise v(0) = theta
    bool record_variance = false;
    /// Intervals discarded before recording when the start is not an exact stationary draw
    /// (variance jumps). Negative selects ceil(10 / (k h)), at least 50.
    int burn_in = -1;
};

/// Euler scheme with `grid.substeps` steps per interval. The variance keeps its own value
/// in the drift and uses max(v, 0) under the square root and in the log-price drift.
[[nodiscard]] PathBundle simulate(const ModelSpec& model, const SamplingGrid& grid, std::uint64_t seed,
                                  const SimulationOptions& options = {});

/// Log-differences of a positive price series (length >= 4).
[[nodiscard]] ReturnSeries returns_from_prices(const std::vector<double>& prices, double h);

} // namespace svmm
