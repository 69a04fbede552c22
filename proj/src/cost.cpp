#include "otlin/cost.hpp"
#include "otlin/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace otlin {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Mesh: return "mesh";
    case ErrorKind::Gate: return "gate";
    case ErrorKind::Extrapolation: return "extrapolation";
    case ErrorKind::Io: return "io";
    case ErrorKind::Usage: return "usage";
    }
    return "unknown";
}

const char* to_string(CostFamily family) noexcept
{
    return family == CostFamily::RadialP ? "radial" : "anisotropic";
}

namespace {

void require_finite(Vec2 v, const char* what)
{
    if (!v.finite()) throw Error(ErrorKind::InvalidInput, fmt::format("{}: non-finite input", what));
}

} // namespace

CostSpec::CostSpec(CostFamily family, double p, const Mat2& A, double lambda_cap)
    : family_(family), p_(p), p_conj_(p > 1.0 ? p / (p - 1.0) : std::numeric_limits<double>::infinity()),
      A_(A), A_inv_(A.inverse()), lambda_(lambda_cap)
{
    if (!std::isfinite(p)) throw Error(ErrorKind::InvalidInput, "cost exponent must be finite");
    if (!(lambda_cap >= 1.0)) throw Error(ErrorKind::InvalidInput, "lambda_cap must be >= 1");
}

CostSpec CostSpec::radial(double p, double lambda_cap)
{
    if (!(p > 1.0)) throw Error(ErrorKind::InvalidInput, fmt::format("cost exponent p={} must exceed 1", p));
    return {CostFamily::RadialP, p, Mat2{}, lambda_cap};
}

CostSpec CostSpec::anisotropic(double p, const Mat2& A, double lambda_cap)
{
    if (!(p > 1.0)) throw Error(ErrorKind::InvalidInput, fmt::format("cost exponent p={} must exceed 1", p));
    if (!(A.a11 > 0.0 && A.det() > 0.0)) throw Error(ErrorKind::InvalidInput, "anisotropy matrix must be SPD");
    return {CostFamily::AnisotropicP, p, A, lambda_cap};
}

CostSpec CostSpec::unchecked_radial(double p, double lambda_cap)
{
    if (!(p > 0.0)) throw Error(ErrorKind::InvalidInput, "cost exponent must be positive");
    return {CostFamily::RadialP, p, Mat2{}, lambda_cap};
}

double CostSpec::cost(Vec2 z) const
{
    require_finite(z, "cost");
    if (family_ == CostFamily::RadialP) return std::pow(z.norm(), p_) / p_;
    return std::pow(std::max(quad(z), 0.0), 0.5 * p_) / p_;
}

Vec2 CostSpec::grad(Vec2 z) const
{
    require_finite(z, "cost_grad");
    if (family_ == CostFamily::RadialP) {
        const double r = z.norm();
        if (r == 0.0) return {};
        return z * std::pow(r, p_ - 2.0);
    }
    const double q = quad(z);
    if (q <= 0.0) return {};
    return (A_ * z) * std::pow(q, 0.5 * (p_ - 2.0));
}

Vec2 CostSpec::dual_grad(Vec2 xi) const
{
    require_finite(xi, "dual_grad");
    if (!admissible()) throw Error(ErrorKind::InvalidInput, "dual of a cost with p <= 1 is undefined");
    if (family_ == CostFamily::RadialP) {
        const double r = xi.norm();
        if (r == 0.0) return {};
        return xi * std::pow(r, p_conj_ - 2.0);
    }
    // ∇c(s·A⁻¹ξ) = s^{p−1} m^{(p−2)/2} ξ with m = ξ·A⁻¹ξ; solve the scalar profile for s.
    const Vec2 w = A_inv_ * xi;
    const double m = dot(xi, w);
    if (m <= 0.0) return {};
    const double coef = std::pow(m, 0.5 * (p_ - 2.0));
    auto profile = [&](double s) { return std::pow(s, p_ - 1.0) * coef - 1.0; };
    double lo = 0.0;
    double hi = 1.0;
    while (profile(hi) < 0.0) hi *= 2.0;
    while (hi > 1e-300 && profile(hi * 0.5) > 0.0) hi *= 0.5;
    lo = hi * 0.5;
    double s = 0.5 * (lo + hi);
    constexpr int max_iter = 200;
    int it = 0;
    for (; it < max_iter; ++it) {
        const double f = profile(s);
        if (std::abs(f) <= 1e-12) break;
        if (f > 0.0) hi = s; else lo = s;
        const double df = (p_ - 1.0) * std::pow(s, p_ - 2.0) * coef;
        double next = s - f / df;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        s = next;
    }
    if (it == max_iter)
        throw Error(ErrorKind::Numerical, fmt::format("dual_grad: Newton residual {:.3e}", profile(s)));
    return w * s;
}

double CostSpec::dual(Vec2 xi) const
{
    require_finite(xi, "dual_eval");
    if (!admissible()) throw Error(ErrorKind::InvalidInput, "dual of a cost with p <= 1 is undefined");
    if (family_ == CostFamily::RadialP) return std::pow(xi.norm(), p_conj_) / p_conj_;
    const Vec2 z = dual_grad(xi);
    return std::max(dot(xi, z) - cost(z), 0.0);
}

Mat2 CostSpec::hessian(Vec2 z) const
{
    const double q = quad(z);
    if (q <= 0.0) throw Error(ErrorKind::Numerical, "cost Hessian undefined at the origin");
    const Vec2 Az = A_ * z;
    return (A_ + outer(Az) * ((p_ - 2.0) / q)) * std::pow(q, 0.5 * (p_ - 2.0));
}

Mat2 CostSpec::dual_hessian(Vec2 xi, double floor) const
{
    const double r = xi.norm();
    if (family_ == CostFamily::RadialP) {
        const double pc = p_conj_;
        if (r < floor) return Mat2{} * std::pow(floor, pc - 2.0);
        const Vec2 u = xi / r;
        return (Mat2{} + outer(u) * (pc - 2.0)) * std::pow(r, pc - 2.0);
    }
    const Vec2 e = r < floor ? (r > 0.0 ? xi * (floor / r) : Vec2{floor, 0.0}) : xi;
    const Mat2 H = hessian(dual_grad(e));
    return H.inverse();
}

std::string CostSpec::describe() const
{
    if (family_ == CostFamily::RadialP) return fmt::format("radial(p={:.17g},lambda={:.17g})", p_, lambda_);
    return fmt::format("anisotropic(p={:.17g},A=[{:.17g},{:.17g},{:.17g}],lambda={:.17g})", p_, A_.a11, A_.a12,
                       A_.a22, lambda_);
}

double v_p(double p, Vec2 x, Vec2 y)
{
    const double d2 = (x - y).norm2();
    if (d2 == 0.0) return 0.0;
    return std::pow(x.norm2() + y.norm2(), 0.5 * (p - 2.0)) * d2;
}

double u_p(double p, Vec2 x, Vec2 y)
{
    const double d = (x - y).norm();
    if (d == 0.0) return 0.0;
    return std::pow(x.norm() + y.norm(), p - 1.0) * d;
}

} // namespace otlin
