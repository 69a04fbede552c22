/**
 * @file measure.hpp
 * @brief Weighted point clouds, balls, Lebesgue quadratures and boundary densities on ∂B_R.
 */
#pragma once

#include "otlin/vec.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace otlin {

struct DiscreteMeasure {
    int dim = 2;
    std::vector<Vec2> points;
    std::vector<double> weights;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
    double mass() const;
    void add(Vec2 point, double weight);
    /// Throws on negative or non-finite weights, length mismatch or bad dimension.
    void validate() const;
};

struct Ball {
    Vec2 center{};
    double radius = 1.0;

    bool contains(Vec2 x) const { return (x - center).norm() < radius; }
};

/// ω_d R^d with ω_1 = 2, ω_2 = π.
double ball_volume(int dim, double radius);
/// |∂B_R|: 2πR for d = 2, two points (counting measure) for d = 1.
double sphere_measure(int dim, double radius);

/// Atoms strictly inside O.
DiscreteMeasure restrict(const DiscreteMeasure& mu, const Ball& O);
/// Indices of atoms strictly inside O, in input order.
std::vector<std::size_t> restrict_indices(const DiscreteMeasure& mu, const Ball& O);
/// μ(O)/|O|.
double kappa(const DiscreteMeasure& mu, const Ball& O);

/// Midpoint quadrature of dx⌞O: polar cells of width R/resolution with about 2π(i+½) sectors per ring (d = 2),
/// or `resolution` uniform cells (d = 1). Weights are exact cell areas, so the total mass is |O|.
DiscreteMeasure lebesgue_quadrature(const Ball& O, int resolution, int dim);

/// Density on ∂B_R. d = 2: n_θ equal angular bins, bin k covers [2πk/n_θ, 2π(k+1)/n_θ).
/// d = 1: two bins, index 0 at −R and index 1 at +R, density = mass.
struct BoundaryData {
    int dim = 2;
    double radius = 1.0;
    std::vector<double> mass;

    static BoundaryData zeros(int dim, double radius, int n_theta);

    int bins() const noexcept { return static_cast<int>(mass.size()); }
    double bin_width() const;            ///< angular width (d = 2)
    double arc_length() const;           ///< arc per bin, 1 for d = 1
    double theta_center(int k) const;
    Vec2 bin_point(int k) const;         ///< point of ∂B_R at the bin centre
    double density(int k) const { return mass[k] / arc_length(); }
    double total() const;
    double sup_density() const;
    /// ∫_{∂B_R} |density|^q ds.
    double lp_integral(double q) const;
    /// Bin containing the direction of x.
    int bin_of(Vec2 x) const;

    BoundaryData operator-(const BoundaryData& o) const;
};

BoundaryData radial_project(const DiscreteMeasure& mu, double R, int n_theta);

/// Circular convolution with a wrapped raised-cosine kernel of angular half-width r.
BoundaryData mollify_boundary(const BoundaryData& b, double r);

struct ProjectionRatios {
    double left = 0.0;    ///< |∂B_R|^{1−p} (∫g)^p
    double middle = 0.0;  ///< ∫_{∂B_R} ĝ^p
    double right = 0.0;   ///< K sup g^{p−1} ∫|R−|x||^{p−1} g, with K = p 2^{p−1}(1+ε)^{(d−1)(p−1)}
    double lower_ratio = 1.0;  ///< middle / left
    double upper_ratio = 1.0;  ///< right / middle
    bool degenerate = false;
    bool pass = true;
};

/// Radial-projection estimate for g supported in the annulus (1−ε)R < |x| < (1+ε)R, ε = 0.1.
/// Atoms are read as a piecewise-constant density on n_θ × n_r polar cells of the annulus.
ProjectionRatios projection_lemma_check(const DiscreteMeasure& g, double R, int n_theta, double p, int n_r = 8);

inline constexpr double kAnnulusEpsilon = 0.1;

// CSV: `x[,y],weight` and `theta_center,mass,density`.
void write_measure_csv(std::ostream& os, const DiscreteMeasure& mu);
DiscreteMeasure read_measure_csv(std::istream& is);
void write_boundary_csv(std::ostream& os, const BoundaryData& b);

} // namespace otlin
