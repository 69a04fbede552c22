/**
 * @file cost.hpp
 * @brief p-cost families c(z), their gradients, convex conjugates and the
 *        comparison quantities V_p, U_p.
 */
#pragma once

#include "otlin/vec.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace otlin {

enum class CostFamily { RadialP, AnisotropicP };

const char* to_string(CostFamily family) noexcept;

/// Member of a p-cost family with certified ellipticity constant Λ.
///
/// RadialP:      c(z) = |z|^p / p
/// AnisotropicP: c(z) = (z·Az)^{p/2} / p, A symmetric positive definite
class CostSpec {
public:
    static CostSpec radial(double p, double lambda_cap);
    static CostSpec anisotropic(double p, const Mat2& A, double lambda_cap);
    /// Skips the p > 1 check. Only the cost side (c, ∇c) is meaningful when p ≤ 1.
    static CostSpec unchecked_radial(double p, double lambda_cap);

    CostFamily family() const noexcept { return family_; }
    double p() const noexcept { return p_; }
    double p_conj() const noexcept { return p_conj_; }
    double lambda_cap() const noexcept { return lambda_; }
    const Mat2& matrix() const noexcept { return A_; }
    bool admissible() const noexcept { return p_ > 1.0; }

    double cost(Vec2 z) const;
    Vec2 grad(Vec2 z) const;
    double dual(Vec2 xi) const;
    Vec2 dual_grad(Vec2 xi) const;

    /// Hessian of c at z (z ≠ 0).
    Mat2 hessian(Vec2 z) const;
    /// Hessian of c* at ξ with |ξ| floored at `floor` to keep it bounded.
    Mat2 dual_hessian(Vec2 xi, double floor) const;

    /// Canonical text form, used in reports and cache keys.
    std::string describe() const;

private:
    CostSpec(CostFamily family, double p, const Mat2& A, double lambda_cap);

    double quad(Vec2 z) const { return dot(z, A_ * z); }

    CostFamily family_;
    double p_;
    double p_conj_;
    Mat2 A_;
    Mat2 A_inv_;
    double lambda_;
};

/// V_p(x,y) = (|x|²+|y|²)^{(p−2)/2} |x−y|², with limit value 0 at x = y.
double v_p(double p, Vec2 x, Vec2 y);

/// U_p(x,y) = (|x|+|y|)^{p−1} |x−y|, with limit value 0 at x = y.
double u_p(double p, Vec2 x, Vec2 y);

/// One entry of an AssumptionReport.
struct AssumptionCheck {
    std::string name;
    double worst_constant = 0.0;
    double allowed_constant = 0.0;
    bool derived = false;   ///< allowed constant derived from Λ rather than Λ itself
    std::vector<double> witness;
    bool pass = true;
};

struct AssumptionReport {
    std::string cost;
    double lambda_cap = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    std::vector<AssumptionCheck> checks;
    double fenchel_young_min_gap = 0.0;
    double fenchel_young_max_equality_gap = 0.0;
    double round_trip_max_error = 0.0;
    bool pass = true;

    const AssumptionCheck* find(const std::string& name) const;
};

/// Sampling-based check of the structural inequalities on the cost and its dual.
AssumptionReport verify_assumptions(const CostSpec& spec, std::uint64_t sample_count, std::uint64_t seed);

/// Constants derived from Λ for the dual inequalities (documented in README).
struct DerivedConstants {
    double growth_dual;
    double size_dual_gradient;
    double c1_growth_dual;
    double c_growth_dual;
    double p_conj_convex;
    double v_diff;
};

DerivedConstants derived_constants(double p, double lambda_cap);

} // namespace otlin
