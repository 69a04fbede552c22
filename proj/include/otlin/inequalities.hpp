/**
 * @file inequalities.hpp
 * @brief Numerical two-sided evaluations of the transport inequalities: triangle-type bound,
 *        adding a common measure, Benamou–Brenier action, Hölder test functions against the
 *        uniform measure, localisation and data restriction.
 */
#pragma once

#include "otlin/trajectory.hpp"

#include <functional>
#include <vector>

namespace otlin {

/// C(ε) = (1 − (1+ε)^{−1/(p−1)})^{1−p}, the constant of c(a+b) ≤ (1+ε)c(a) + C(ε)c(b) for p-homogeneous convex c.
double triangle_constant(double p, double eps);

struct TriangleResult {
    double w13 = 0.0;
    double w12 = 0.0;
    double w23 = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double C_used = 0.0;
    bool pass = true;
};

TriangleResult triangle_check(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2, const DiscreteMeasure& mu3,
                              double eps, const CostSpec& cost);

/// min over δ ∈ (0,1) of C(δ)/(1−δ).
double add_constant_bound(double p);

struct AddConstantResult {
    double numerator = 0.0;    ///< W_c(μ1, μ2)
    double denominator = 0.0;  ///< W_c(μ1+μ2, 2μ2)
    double ratio = 0.0;
    double bound = 0.0;
    bool degenerate = false;
    bool pass = true;
};

AddConstantResult add_constant_check(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2, const CostSpec& cost);

/// Cells carrying densities for the Eulerian action.
struct CellGrid {
    std::vector<Vec2> centers;
    std::vector<double> volumes;

    /// Square cells of side h covering [−L, L]².
    static CellGrid square(double L, double h);
    std::size_t size() const noexcept { return centers.size(); }
    /// Cell index of x, or −1 outside.
    long locate(Vec2 x) const;

    double half_width = 0.0;
    double h = 0.0;
    int n = 0;
};

/// Density ρ and flux j per cell at one time.
struct FlowSnapshot {
    std::vector<double> rho;
    std::vector<Vec2> j;
};

struct ActionResult {
    double direct = 0.0;   ///< Σ_t Σ_cells ρ c(j/ρ) vol Δt
    double duality = 0.0;  ///< best value of Σ (⟨ξ, j⟩ − c*(ξ)ρ) vol Δt over the test covectors
    bool pass = true;      ///< duality ≤ direct + tolerance
};

/// Snapshots are equally spaced in [0,1] (midpoint rule in time).
ActionResult benamou_brenier_action(const std::vector<FlowSnapshot>& path, const CellGrid& grid, const CostSpec& cost);

/// Binned displacement interpolation of a plan: ρ_t, j_t at the n_t midpoint times.
std::vector<FlowSnapshot> displacement_flow(const TransportPlan& plan, const CellGrid& grid, int n_t);

struct HolderTestResult {
    double lhs = 0.0;       ///< |∫ ξ (dμ − κ dx)|
    double rhs = 0.0;       ///< [ξ]_α W_c^{α/p} R^{2d(p−α)/p}
    double seminorm = 0.0;  ///< estimated [ξ]_α
    double wc = 0.0;
    double K = 0.0;         ///< Λ^{α/p} mass^{1−α/p} R^{−2d(p−α)/p}
    bool pass = true;       ///< lhs ≤ K·rhs
};

/// μ is restricted to B_R; the seminorm is the largest difference quotient over all pairs of atoms and
/// quadrature nodes.
HolderTestResult c2measures_check(const std::function<double(Vec2)>& xi, double alpha, const DiscreteMeasure& mu,
                                  double R, const CostSpec& cost, int resolution);

struct LocalisationResult {
    double lhs = 0.0;  ///< ∫_Ω c dπ
    double w_local = 0.0;
    double smallness = 0.0;  ///< E(4) + D(4)
    double rhs = 0.0;
    bool pass = true;
};

LocalisationResult localisation_check(const TransportPlan& plan, double R, const CostSpec& cost, double delta,
                                      double tau_tolerance, double smallness);

struct DataRestrictionResult {
    std::vector<double> radii;
    std::vector<double> integrand;
    double integral_estimate = 0.0;
    double D4 = 0.0;
    double ratio = 0.0;
    bool degenerate = false;
};

/// Trapezoid estimate of ∫_2^3 D_μ(R) dR against D_μ(4), where D_μ is the one-measure half of D.
DataRestrictionResult data_restriction_check(const DiscreteMeasure& mu, const CostSpec& cost,
                                             const std::vector<double>& radii, int resolution);

} // namespace otlin
