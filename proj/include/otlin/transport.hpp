/**
 * @file transport.hpp
 * @brief Exact discrete optimal transport, oracles, cyclical monotonicity and the smallness
 *        quantities E(R), D(R).
 */
#pragma once

#include "otlin/cost.hpp"
#include "otlin/measure.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

namespace otlin {

struct PlanEntry {
    std::size_t i;  ///< source atom
    std::size_t j;  ///< target atom
    double mass;
};

struct TransportPlan {
    std::shared_ptr<const DiscreteMeasure> source;
    std::shared_ptr<const DiscreteMeasure> target;
    std::vector<PlanEntry> entries;
    double total_cost = 0.0;
    double dual_certificate = 0.0;  ///< max dual infeasibility / slackness violation
    std::size_t pivots = 0;

    Vec2 x(const PlanEntry& e) const { return source->points[e.i]; }
    Vec2 y(const PlanEntry& e) const { return target->points[e.j]; }
    double mass() const;
    /// Largest relative marginal defect over rows and columns.
    double marginal_error() const;
};

/// Largest number of dense cost-matrix entries a single solve may allocate.
inline constexpr std::size_t kMaxDenseEntries = 4'000'000;

TransportPlan solve_exact(const DiscreteMeasure& lambda, const DiscreteMeasure& mu, const CostSpec& cost);
/// W_c(λ, μ); zero when both measures carry no mass.
double transport_cost(const DiscreteMeasure& lambda, const DiscreteMeasure& mu, const CostSpec& cost);
TransportPlan brute_force(const DiscreteMeasure& lambda, const DiscreteMeasure& mu, const CostSpec& cost);
TransportPlan monotone_1d(const DiscreteMeasure& lambda, const DiscreteMeasure& mu, const CostSpec& cost);
double plan_cost(const TransportPlan& plan, const CostSpec& cost);

struct CyclicViolation {
    std::vector<std::size_t> entries;  ///< plan entry indices forming the cycle
    double excess;                     ///< Σ c(x_i − y_i) − Σ c(x_i − y_{i+1})
};

std::vector<CyclicViolation> check_cyclical_monotonicity(const TransportPlan& plan, const CostSpec& cost, int N,
                                                         std::uint64_t trials, std::uint64_t seed);

enum class Normalization { ScaleInvariant, PlainVolume };
enum class DataMetric { Wc, WpP };

const char* to_string(Normalization n) noexcept;

/// Σ over entries with x ∈ B_R or y ∈ B_R of mass·c(x − y), divided by |B_R|R^p or |B_R|.
double energy_E(const TransportPlan& plan, double R, const CostSpec& cost,
                Normalization normalization = Normalization::ScaleInvariant);

/// Optimal plan between μ⌞B_R and κ_{μ,R} dx⌞B_R (discretised by lebesgue_quadrature).
struct LocalUniformPlan {
    DiscreteMeasure local;            ///< μ⌞B_R
    std::vector<std::size_t> index;   ///< local atom → atom of μ
    DiscreteMeasure uniform;          ///< κ dx⌞B_R quadrature
    TransportPlan plan;
    double kappa = 0.0;
    double cost = 0.0;                ///< W term (W_c or W_p^p)
};

LocalUniformPlan local_uniform_plan(const DiscreteMeasure& mu, double R, const CostSpec& cost, int resolution,
                                    DataMetric metric = DataMetric::Wc);

struct DataTerm {
    double value = 0.0;
    double w_lambda = 0.0;  ///< W(λ⌞B_R, κ_λ dx)/|B_R|
    double w_mu = 0.0;
    double kappa_lambda = 0.0;
    double kappa_mu = 0.0;
    double k_lambda = 0.0;  ///< R^p κ^{1−p}|κ − 1|^p
    double k_mu = 0.0;
};

/// One-measure half of D(R).
DataTerm data_half(const DiscreteMeasure& mu, double R, const CostSpec& cost, int resolution,
                   DataMetric metric = DataMetric::Wc);
DataTerm data_D(const DiscreteMeasure& lambda, const DiscreteMeasure& mu, double R, const CostSpec& cost,
                int resolution, DataMetric metric = DataMetric::Wc);

struct SmallnessReport {
    std::map<double, double> E_values;
    std::map<double, double> D_values;
    Normalization normalization = Normalization::ScaleInvariant;
};

SmallnessReport smallness_report(const TransportPlan& plan, const std::vector<double>& radii, const CostSpec& cost,
                                 int resolution, Normalization normalization = Normalization::ScaleInvariant);

} // namespace otlin
