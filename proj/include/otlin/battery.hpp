/**
 * @file battery.hpp
 * @brief Seeded instance batteries for the inequality checks, one per lemma name.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace otlin {

/// Names accepted by `verify lemma`.
const std::vector<std::string>& lemma_names();
bool is_lemma_name(const std::string& name);

/// Frozen constants of the batteries (documented in README).
namespace suite {
inline constexpr double kSpreadLimit = 10.0;          ///< max/median (or max/min) over a ratio column
inline constexpr double kLocalisationDelta = 0.5;
inline constexpr double kLocalisationTau = 0.1;
inline constexpr double kDataRestriction = 4.0;       ///< ∫_2^3 D_μ(R) dR ≤ K·D_μ(4)
inline constexpr double kRegularity = 10.0;           ///< energy, interior and mollification ratios
inline constexpr double kIdentityTolerance = 1e-10;   ///< p = 2 expand-the-squares identity
} // namespace suite

struct LemmaBattery {
    std::string lemma;
    std::vector<std::string> columns;        ///< per-row values after `seed`
    std::vector<std::uint64_t> seeds;
    std::vector<std::vector<double>> rows;
    std::vector<bool> row_pass;
    std::vector<std::string> ratio_columns;  ///< columns whose spread is bounded
    std::vector<double> spread;              ///< max/median (max/min for linfty, per p) per ratio column
    bool pass = true;

    std::size_t column(const std::string& name) const;
};

/// Runs `count` seeded instances starting at `first_seed`. Rows are in seed order regardless of
/// the worker count.
LemmaBattery run_lemma_battery(const std::string& lemma, int count, std::uint64_t first_seed = 1,
                               unsigned workers = 0);

/// `seed,<columns>,pass`.
void write_battery_csv(std::ostream& os, const LemmaBattery& battery);
std::string battery_json(const LemmaBattery& battery, const std::string& config_hash);

/// max/median of the finite entries; 1 when there are none.
double spread_over_median(const std::vector<double>& values);
/// max/min of the finite positive entries; 1 when there are none.
double spread_over_min(const std::vector<double>& values);

} // namespace otlin
