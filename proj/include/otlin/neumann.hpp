/**
 * @file neumann.hpp
 * @brief Nonlinear Neumann problem −div ∇c*(Dφ) = c_R in B_R, ∇c*(Dφ)·ν = g on ∂B_R,
 *        solved by minimising the convex dual energy over mean-zero P1 fields.
 */
#pragma once

#include "otlin/cost.hpp"
#include "otlin/measure.hpp"
#include "otlin/mesh.hpp"

#include <iosfwd>
#include <memory>
#include <vector>

namespace otlin {

/// Nodal P1 field on a disk mesh.
struct ScalarField {
    std::shared_ptr<const DiskMesh> mesh;
    std::vector<double> values;

    double eval(Vec2 x, bool allow_outside = false) const;
    /// Gradient of the containing triangle.
    Vec2 gradient(Vec2 x, bool allow_outside = false) const;
    Vec2 triangle_gradient(int t) const;
    /// ∫_{B_R} φ dx / |B_R| over the polygon.
    double mean() const;
};

struct NeumannProblem {
    std::shared_ptr<const DiskMesh> mesh;
    CostSpec cost;
    BoundaryData g;             ///< signed net flux density on ∂B_R
    std::vector<double> load;   ///< ∫_{∂B_R} g φ_i ds
    std::vector<double> lumped; ///< ∫_{B_R} φ_i dx
    double c_R = 0.0;           ///< −∫g / |B_R|
    double compatibility = 0.0; ///< |Σ load + c_R |B_R||
    double g_lp = 0.0;          ///< ‖g‖_{L^p(∂B_R)}
};

/// Boundary loads are integrated along arcs with the bins of `g` split exactly.
NeumannProblem make_neumann_problem(std::shared_ptr<const DiskMesh> mesh, const CostSpec& cost, const BoundaryData& g);

struct SolveInfo {
    int iterations = 0;
    double residual = 0.0;   ///< dual norm of the weak residual
    double threshold = 0.0;  ///< tol·(1 + ‖g‖_{L^p})
    double energy = 0.0;
    bool monotone = true;    ///< J never increased across accepted steps
    std::vector<double> energy_history;
};

struct NeumannSolution {
    ScalarField phi;
    SolveInfo info;
};

/// Damped Newton on J(φ) = ∫ c*(Dφ) − ∫_∂ gφ − c_R ∫φ with Armijo backtracking.
NeumannSolution solve_neumann(const NeumannProblem& prob, double tol = 1e-8, int max_iter = 100000);

/// Direct solve of the linear p = 2 problem (stiffness system with one pinned node, then mean removal).
ScalarField solve_linear_p2(const NeumannProblem& prob);

double dual_energy(const NeumannProblem& prob, const std::vector<double>& phi);

/// Per-triangle ∇c*(Dφ).
std::vector<Vec2> flux_field(const ScalarField& phi, const CostSpec& cost);

/// ∫_{∂B_R} (discrete flux · ν) ds + c_R |B_R|, using the flux of the boundary triangles.
double discrete_flux_balance(const NeumannProblem& prob, const ScalarField& phi);

struct DiagnosticsReport {
    double g_lp_p = 0.0;          ///< ∫_∂ |g|^p
    double energy_ratio = 0.0;    ///< ∫|Dφ|^{p'} / ∫|g|^p
    double alt_energy_ratio = 0.0;///< ∫ c(∇c*(Dφ)) / ∫|g|^p
    double interior_ratio = 0.0;  ///< sup_{B_{R−0.5}} |Dφ|^{p'} / ∫|g|^p
    std::vector<double> r_values;
    std::vector<double> diff_integrals;  ///< ∫|Dφ − Dφ^r|^{p'}
    double fitted_s = 0.0;
    double diff_ratio = 0.0;      ///< max_r ∫|Dφ−Dφ^r|^{p'} / (r^s ∫|g|^p)
    double beta = 0.5;
};

DiagnosticsReport regularity_diagnostics(const NeumannProblem& prob, const ScalarField& phi,
                                         const std::vector<std::pair<double, ScalarField>>& phi_r);

struct HolderProduct {
    double lhs = 0.0;   ///< [c*(Dφ) + c(∇c*(Dφ))]_β
    double sup_grad = 0.0;
    double grad_seminorm = 0.0;  ///< [Dφ]_β
    double rhs = 0.0;   ///< ‖Dφ‖_∞^{p'−1} [Dφ]_β
    double ratio = 0.0;
    bool degenerate = false;
};

/// Seminorms over triangle centroids in B_radius at separation ≥ 2h, β = 0.5.
HolderProduct holder_product_check(const ScalarField& phi, const CostSpec& cost, double radius, double beta = 0.5);

void write_field_csv(std::ostream& os, const ScalarField& phi);

} // namespace otlin
