/**
 * @file trajectory.hpp
 * @brief Trajectory view X(t) = (1−t)x + t·y of a plan: crossing times, boundary measures,
 *        the approximate boundary data, radius selection and path integrals.
 */
#pragma once

#include "otlin/transport.hpp"

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace otlin {

struct Trajectory {
    Vec2 x;
    Vec2 y;
    double mass = 0.0;

    Vec2 at(double t) const { return x * (1.0 - t) + y * t; }
    Vec2 velocity() const { return y - x; }
};

/// σ = entry (min) time, τ = exit (max) time of B̄_R.
struct CrossingTimes {
    double sigma;
    double tau;
};

std::optional<CrossingTimes> crossing_times(const Trajectory& traj, double R);

std::vector<Trajectory> trajectories(const TransportPlan& plan);

/// Entry and exit points of the trajectories meeting B̄_R, as atoms on ∂B_R.
/// A trajectory enters through ∂B_R when x ∉ B_R and exits when y ∉ B_R.
struct BoundaryAtoms {
    DiscreteMeasure f;
    DiscreteMeasure g;
};

BoundaryAtoms boundary_atoms(const TransportPlan& plan, double R);

std::pair<BoundaryData, BoundaryData> entry_exit_measures(const TransportPlan& plan, double R, int n_theta);

struct ApproxBoundary {
    DiscreteMeasure f_prime;  ///< endpoints of backward-extended entering trajectories
    DiscreteMeasure g_prime;  ///< endpoints of forward-extended exiting trajectories
    BoundaryData f_raw;       ///< radial projections before mollification
    BoundaryData g_raw;
    BoundaryData f_bar;       ///< mollified
    BoundaryData g_bar;
    double density_ratio_f = 0.0;  ///< max over quadrature cells of f′ / (κ_{λ,4}·cell area)
    double density_ratio_g = 0.0;
    bool density_ok = true;
};

/// Approximate boundary data. The auxiliary plans π̄ from λ⌞B_s, μ⌞B_s to their uniform quadratures
/// are solved once and reused for every radius.
class BoundaryApproximator {
public:
    BoundaryApproximator(const TransportPlan& plan, const CostSpec& cost, int resolution, double scale = 4.0);
    BoundaryApproximator(const TransportPlan& plan, LocalUniformPlan lambda_side, LocalUniformPlan mu_side);

    ApproxBoundary at(double R, int n_theta, double r) const;

    const LocalUniformPlan& lambda_side() const { return lam_; }
    const LocalUniformPlan& mu_side() const { return mu_; }

private:
    const TransportPlan& plan_;
    LocalUniformPlan lam_;
    LocalUniformPlan mu_;
    std::vector<long> lam_local_;  ///< atom of λ → local index (−1 outside)
    std::vector<long> mu_local_;
    std::vector<std::vector<std::pair<std::size_t, double>>> lam_rows_;  ///< local atom → (quadrature atom, mass)
    std::vector<std::vector<std::pair<std::size_t, double>>> mu_rows_;
};

ApproxBoundary approximate_boundary_data(const TransportPlan& plan, const CostSpec& cost, double R, int n_theta,
                                         double r, int resolution);

struct RadiusScore {
    double R;
    double crossing_cost;
    double D_R;
    double boundary_lp;
    double score;
};

struct RadiusSelection {
    double R_star = 0.0;
    std::vector<RadiusScore> scores;
};

/// Default candidates: 11 equispaced radii in [2.05, 2.95].
std::vector<double> default_radius_candidates();

RadiusSelection select_radius(const TransportPlan& plan, const BoundaryApproximator& approx, const CostSpec& cost,
                              const std::vector<double>& candidates, int n_theta, double r, int resolution);

struct Displacement {
    double sup_disp = 0.0;
    double bound_check = 0.0;
    double exponent = 0.0;  ///< 1/(p+d)
};

/// Sup of |x − y| over entries in #_3, compared with (E(4)+D(4))^{1/(p+d)}.
Displacement linfty_displacement(const TransportPlan& plan, const CostSpec& cost, double E4_plus_D4);

/// Gauss–Legendre nodes and weights on [0, 1].
std::vector<std::pair<double, double>> gauss_legendre(int order);

using PointField = std::function<double(Vec2)>;

double path_integral(const Trajectory& traj, const PointField& h, double t0, double t1, int order = 8);

/// Σ over entries meeting B̄_R of mass·c(x − y) for trajectories whose |X(t)| attains R.
double crossing_cost(const TransportPlan& plan, const CostSpec& cost, double R);

} // namespace otlin
