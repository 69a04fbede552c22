/**
 * @file pipeline.hpp
 * @brief End-to-end linearisation experiment: exact plan, radius selection, approximate boundary
 *        data, dual Neumann solve, the quasi-orthogonality ledger and the three error terms.
 */
#pragma once

#include "otlin/error.hpp"
#include "otlin/neumann.hpp"
#include "otlin/trajectory.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace otlin {

struct LinearizationConfig {
    int n_theta = 64;
    double mollify_bins = 4.0;          ///< mollification half-width r in units of the bin width
    double mesh_h = 0.1;
    double mesh_grading = 1.0;
    int data_resolution = 20;           ///< quadrature resolution of the uniform reference measures
    std::vector<double> radius_candidates = default_radius_candidates();
    double gate = 0.5;                  ///< admissible E(4) + D(4)
    double solver_tol = 1e-8;
    int max_iter = 100000;
    bool solve_raw = true;              ///< also solve with the unmollified boundary data
    bool time_resolved = false;         ///< evaluate Dφ along X(t) instead of at the source point
    double term_constant = 1.0;         ///< C in the budget τE(4) + C·D(4)

    double mollify_radius() const;
};

/// Closed-form solution of the one-dimensional problem −(∇c*(φ′))′ = c_R on (−R, R)
/// with outward flux g₋ at −R and g₊ at +R. The flux F = ∇c*(φ′) is affine.
struct IntervalSolution {
    double R = 1.0;
    double c_R = 0.0;
    double intercept = 0.0;   ///< F(x) = −c_R x + intercept
    CostSpec cost = CostSpec::radial(2.0, 2.0);

    static IntervalSolution solve(const BoundaryData& net, const CostSpec& cost);
    double flux(double x) const { return -c_R * x + intercept; }
    Vec2 gradient(Vec2 x) const;
};

struct QuasiOrthogonalityLedger {
    double lhs_V = 0.0;          ///< ∫_Ω∫_σ^τ V_p(Ẋ, ∇c*(Dφ(X))) dt dπ
    double term_a = 0.0;         ///< ∫_Ω c(x−y) dπ − ∫_{B_R} c(∇c*(Dφ)) dx
    double term_b = 0.0;         ///< −∫_Ω∫_σ^τ ⟨Ẋ − ∇c*(Dφ(X)), Dφ(X)⟩ dt dπ
    double term_c = 0.0;         ///< ∫_{B_R} c(∇c*(Dφ)) dx − ∫_Ω∫_σ^τ c(∇c*(Dφ(X))) dt dπ
    double rhs = 0.0;            ///< a + b + c
    double convexity_constant = 0.0;  ///< c(p,Λ) = 1/Λ
    double time_slack = 0.0;     ///< ∫_Ω (1 − (τ−σ)) c(x−y) dπ
    double bregman = 0.0;        ///< ∫_Ω∫_σ^τ [c(Ẋ) − c(F) − ⟨Ẋ−F, Dφ⟩] dt dπ
    double identity_defect = 0.0;///< |rhs − time_slack − bregman|
    double omega_mass = 0.0;
    std::size_t entries = 0;
    std::size_t pieces = 0;
    std::size_t clamped_pieces = 0;  ///< path pieces between the boundary chords and the circle
    bool pass = true;                ///< c(p,Λ)·lhs_V ≤ rhs + 1e−8
};

QuasiOrthogonalityLedger quasi_orthogonality_ledger(const TransportPlan& plan, const ScalarField& phi, double R,
                                                    const CostSpec& cost);
QuasiOrthogonalityLedger quasi_orthogonality_ledger(const TransportPlan& plan, const IntervalSolution& phi, double R,
                                                    const CostSpec& cost);

/// Integral form of the smallness quantities used in budgets: τ·∫_{#_4} c dπ + C·|B_4|·D(4).
struct Smallness {
    double E4 = 0.0;          ///< scale-invariant normalisation |B_4|·4^p
    double E4_plain = 0.0;    ///< plain normalisation |B_4|
    double E4_total = 0.0;    ///< ∫_{#_4} c dπ
    double D4 = 0.0;
    double D4_total = 0.0;    ///< |B_4|·D(4)

    double sum() const { return E4_plain + D4; }
};

Smallness compute_smallness(const TransportPlan& plan, const CostSpec& cost, int resolution);

struct TermEstimates {
    double energy_gap = 0.0;    ///< ∫_Ω c(x−y) dπ − ∫_{B_R} c(∇c*(Dφ^r)) dx
    double pairing = 0.0;       ///< ∫_Ω∫_σ^τ ⟨Ẋ − ∇c*(Dφ^r(X)), Dφ^r(X)⟩ dt dπ
    double fubini_gap = 0.0;    ///< ∫_{B_R} c(∇c*(Dφ^r)) dx − ∫_Ω∫_σ^τ c(∇c*(Dφ^r(X))) dt dπ
    double tau = 0.0;
    double constant = 0.0;
    double budget = 0.0;        ///< τ·E4_total + C·D4_total
    bool pass_energy = true;
    bool pass_pairing = true;   ///< |pairing| ≤ budget
    bool pass_fubini = true;
    bool pass = true;
};

TermEstimates term_estimates(const TransportPlan& plan, const ScalarField& phi_r, double R, const CostSpec& cost,
                             double tau_tolerance, const Smallness& smallness, double constant);
TermEstimates term_estimates(const QuasiOrthogonalityLedger& ledger, double tau_tolerance, const Smallness& smallness,
                             double constant);

struct LinearizationReport {
    int dim = 2;
    std::string cost;
    double tau_tolerance = 0.0;
    double gate = 0.0;
    double R_selected = 0.0;
    std::vector<RadiusScore> radius_scores;
    Smallness smallness;
    double mollify_radius = 0.0;
    double lhs_main = 0.0;          ///< Σ_{#_1} m·c(y − x − ∇c*(Dφ^r(x)))
    double lhs_main_raw = 0.0;      ///< same with the unmollified solution
    double lhs_main_time = 0.0;     ///< time-resolved variant, filled when enabled
    std::size_t main_entries = 0;
    std::size_t main_clamped = 0;   ///< source points pulled onto the mesh polygon
    QuasiOrthogonalityLedger ledger;
    TermEstimates terms;
    double sup_gradient = 0.0;      ///< sup_{B_1} |Dφ^r|^{p'}
    double energy_gradient = 0.0;   ///< ∫_{B_R} |Dφ^r|^{p'}
    double gradient_ratio = 0.0;    ///< (sup + energy)/(E(4) + D(4))
    double vc_ratio = 0.0;          ///< lhs_main / (lhs_V + lhs_V^{2/p} E_total^{1−2/p}), p ≥ 2
    bool vc_applicable = false;
    Displacement displacement;
    double boundary_density_ratio = 0.0;
    bool boundary_density_ok = true;
    SolveInfo solve_info;
    SolveInfo solve_info_raw;
    std::size_t mesh_nodes = 0;
    double c_R = 0.0;
    bool gate_passed = true;
};

/// Thrown when E(4) + D(4) exceeds the gate; carries the partial report.
class GateError : public Error {
public:
    GateError(const std::string& message, LinearizationReport report)
        : Error(ErrorKind::Gate, message, "gate"), report_(std::move(report)) {}
    const LinearizationReport& report() const noexcept { return report_; }

private:
    LinearizationReport report_;
};

LinearizationReport run_linearization(const DiscreteMeasure& lambda, const DiscreteMeasure& mu, const CostSpec& cost,
                                      double tau_tolerance, const LinearizationConfig& config = {});

/// Same pipeline on a precomputed optimal plan.
LinearizationReport run_linearization(const TransportPlan& plan, const CostSpec& cost, double tau_tolerance,
                                      const LinearizationConfig& config = {});

using InstanceGenerator = std::function<std::pair<DiscreteMeasure, DiscreteMeasure>(double scale)>;
using SeededGenerator = std::function<std::pair<DiscreteMeasure, DiscreteMeasure>(double scale, std::uint64_t seed)>;

struct ScalingRow {
    double scale = 0.0;
    std::uint64_t seed = 0;
    double E4 = 0.0;       ///< plain normalisation
    double D4 = 0.0;
    double lhs_main = 0.0;
    double sup_disp = 0.0;
    double R_selected = 0.0;
    double gradient_ratio = 0.0;
    std::string error;      ///< empty on success
};

struct ScalingStudy {
    std::vector<ScalingRow> rows;
    double slope = 0.0;     ///< least-squares slope of log lhs_main against log E4, pooled over all rows
    bool degenerate = false;
};

/// Runs the pipeline per scale (concurrently, merged by scale index). Per-run failures are recorded.
ScalingStudy scaling_study(const InstanceGenerator& family, const std::vector<double>& scales, const CostSpec& cost,
                           double tau_tolerance, const LinearizationConfig& config = {});

/// One row per (scale, seed), scale-major.
ScalingStudy scaling_study(const SeededGenerator& family, const std::vector<double>& scales,
                           const std::vector<std::uint64_t>& seeds, const CostSpec& cost, double tau_tolerance,
                           const LinearizationConfig& config = {});

/// Least-squares slope of log y against log x over pairs with x, y > 0; NaN with fewer than two pairs.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// CSV `scale,seed,E4,D4,lhs_main,sup_disp,R_selected,gradient_ratio` and a two-column log-log data file.
void write_study_csv(std::ostream& os, const ScalingStudy& study);
void write_study_dat(std::ostream& os, const ScalingStudy& study);

} // namespace otlin
