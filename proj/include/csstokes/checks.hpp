#pragma once

#include <optional>
#include <string>
#include <vector>

#include "csstokes/model.hpp"
#include "csstokes/picard.hpp"

namespace csstokes {

/// Thresholds used by the invariant table.
namespace thresholds {
inline constexpr double energy_residual = 5e-3;
inline constexpr double energy_refinement_factor = 3.0;
inline constexpr double momentum_drift = 1e-6;
inline constexpr double picard_contraction = 0.5;
}  // namespace thresholds

struct CheckRow {
    std::string name;
    bool passed = true;
    bool applicable = true;
    std::string detail;
};

struct DtStarScan {
    std::optional<double> dt_star;  ///< first dt whose within-step ratio exceeds 1/2
    double largest_tested = 0.0;
    std::vector<std::pair<double, double>> ratios;  ///< (dt, max ratio), +inf when the iteration failed
};

/// Doubles dt from config.dt for up to `doublings` levels, taking `steps`
/// steps each without the dt/2 retry, and reports where the Picard residual
/// ratio first exceeds 1/2.
DtStarScan scan_dt_star(const SimConfig& config, int doublings = 8, int steps = 4);

struct CheckOptions {
    bool refine = true;        ///< dt/2 rerun for the energy-budget order check
    bool scan_dt_star = true;
};

struct CheckReport {
    std::vector<CheckRow> rows;
    RunResult run;
    std::optional<RunResult> refined;
    std::optional<DtStarScan> dt_star;
    bool all_passed() const;
};

/// Runs the configuration and evaluates the invariant table: mass, positivity,
/// momentum, energy budget, energy monotonicity, support bound, Picard
/// contraction, moment monitor and the Stokes space-time ratio.
CheckReport check_config(const SimConfig& config, const CheckOptions& options = {});

std::string format_check_table(const std::vector<CheckRow>& rows);

/// Largest F(k+1)/F(k) over every step of a run.
double max_contraction_ratio(const std::vector<StepReport>& reports);
/// True when E(t_k+1) <= E(t_k) at every record.
bool energy_nonincreasing(std::span<const DiagnosticsRecord> records);

}  // namespace csstokes
