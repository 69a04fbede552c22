#include "otlin/cost.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace otlin {

DerivedConstants derived_constants(double p, double lambda_cap)
{
    const double L = lambda_cap;
    const double pc = p / (p - 1.0);
    DerivedConstants k{};
    // Conjugating Λ⁻¹|x|^p ≤ c ≤ Λ|x|^p.
    k.growth_dual = std::max(std::pow(L / p, pc - 1.0) / pc, pc * std::pow(L * p, pc - 1.0));
    // Λ⁻¹-monotonicity gives |∇c(x)| ≥ 2Λ⁻¹|x|^{p−1}; controlled growth with |h| = |x| gives ≤ Λ3^{p−1}|x|^{p−1}.
    k.size_dual_gradient = 3.0 * std::pow(L, pc - 1.0);
    const double ks = k.size_dual_gradient;
    if (p <= 2.0)
        k.c1_growth_dual = 0.5 * L * std::pow(2.0 * ks, 2.0 - p);
    else
        k.c1_growth_dual = 0.5 * L * std::pow(ks, p - 2.0) * std::pow(2.0, (p - 2.0) / (p - 1.0));
    k.c_growth_dual = ks;
    // No closed chain is available for the conjugate convexity; crude majorant.
    k.p_conj_convex = std::pow(3.0 * L, 2.0 * std::max(p, pc));
    k.v_diff = 2.0 * std::abs(p - 2.0) + 2.0 * std::numbers::sqrt2;
    return k;
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const
{
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    Vec2 point()
    {
        const double r = std::pow(10.0, unit_(rng_) * 6.0 - 3.0);
        double angle;
        if (unit_(rng_) < 0.5)
            angle = 2.0 * std::numbers::pi * unit_(rng_);
        else
            angle = 0.25 * std::numbers::pi * static_cast<double>(std::min<int>(7, static_cast<int>(unit_(rng_) * 8.0)));
        return {r * std::cos(angle), r * std::sin(angle)};
    }

    double fraction() { return unit_(rng_); }

private:
    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

struct Tracker {
    AssumptionCheck check;

    Tracker(std::string name, double allowed, bool derived)
    {
        check.name = std::move(name);
        check.allowed_constant = allowed;
        check.derived = derived;
    }

    void observe(double value, std::vector<double> witness)
    {
        if (std::isnan(value)) value = std::numeric_limits<double>::infinity();
        if (value > check.worst_constant || check.witness.empty()) {
            check.worst_constant = std::max(check.worst_constant, value);
            check.witness = std::move(witness);
        }
    }

    AssumptionCheck finish()
    {
        check.pass = std::isfinite(check.worst_constant) && check.worst_constant <= check.allowed_constant * (1.0 + 1e-9);
        return check;
    }
};

// Convexity-defect ratio taken at the favourable end of the rounding interval of the defect.
double guarded_ratio(double num, double den, double scale)
{
    const double rounding = 16.0 * std::numeric_limits<double>::epsilon() * scale;
    return num / std::max(den + rounding, std::numeric_limits<double>::min());
}

} // namespace

AssumptionReport verify_assumptions(const CostSpec& spec, std::uint64_t sample_count, std::uint64_t seed)
{
    AssumptionReport rep;
    rep.cost = spec.describe();
    rep.lambda_cap = spec.lambda_cap();
    rep.samples = sample_count;
    rep.seed = seed;

    const double p = spec.p();
    const double L = spec.lambda_cap();
    Sampler s(seed);

    Tracker elliptic("strong_p_convexity", L, false);
    Tracker growth("p_growth", L, false);
    Tracker cgrowth("c_growth", L, false);
    Tracker controlled("controlled_growth", L, false);

    for (std::uint64_t i = 0; i < sample_count; ++i) {
        const Vec2 x = s.point();
        const Vec2 y = s.point();
        const double t = s.fraction();
        const double cx = spec.cost(x);
        const double cy = spec.cost(y);
        const double mix = t * cx + (1.0 - t) * cy;
        const double defect = mix - spec.cost(x * t + y * (1.0 - t));
        elliptic.observe(guarded_ratio(t * (1.0 - t) * v_p(p, x, y), defect, mix), {x.x, x.y, y.x, y.y, t});

        const double rp = std::pow(x.norm(), p);
        growth.observe(std::max(cx / rp, rp / cx), {x.x, x.y});

        const double u = u_p(p, x, y);
        if (u > 0.0) cgrowth.observe(std::abs(cx - cy) / u, {x.x, x.y, y.x, y.y});

        const double dxy = (x - y).norm();
        if (dxy > 0.0) {
            const double den = std::pow(x.norm() + y.norm(), p - 2.0) * dxy;
            controlled.observe((spec.grad(x) - spec.grad(y)).norm() / den, {x.x, x.y, y.x, y.y});
        }
    }
    rep.checks = {elliptic.finish(), growth.finish(), cgrowth.finish(), controlled.finish()};

    if (!spec.admissible()) {
        AssumptionCheck bad;
        bad.name = "exponent_above_one";
        bad.worst_constant = p;
        bad.allowed_constant = 1.0;
        bad.pass = false;
        rep.checks.push_back(bad);
    } else {
        const double pc = spec.p_conj();
        const DerivedConstants k = derived_constants(p, L);
        Tracker growth_dual("growth_dual", k.growth_dual, true);
        Tracker size_dual("size_dual_gradient", k.size_dual_gradient, true);
        Tracker c1_dual("c1_growth_dual", k.c1_growth_dual, true);
        Tracker c_dual("c_growth_dual", k.c_growth_dual, true);
        Tracker conj_convex("p_conj_convexity", k.p_conj_convex, true);
        Tracker vdiff("v_diff", k.v_diff, true);

        double fy_min = std::numeric_limits<double>::infinity();
        double fy_eq = 0.0;
        double round_trip = 0.0;
        for (std::uint64_t i = 0; i < sample_count; ++i) {
            const Vec2 a = s.point();
            const Vec2 b = s.point();
            const double t = s.fraction();
            const double ca = spec.dual(a);
            const double cb = spec.dual(b);
            const Vec2 ga = spec.dual_grad(a);
            const Vec2 gb = spec.dual_grad(b);

            const double ra = std::pow(a.norm(), pc);
            growth_dual.observe(std::max(ca / ra, ra / ca), {a.x, a.y});
            const double sa = std::pow(a.norm(), pc - 1.0);
            size_dual.observe(std::max(ga.norm() / sa, sa / ga.norm()), {a.x, a.y});

            const double dab = (a - b).norm();
            if (dab > 0.0) {
                const double den = std::pow(a.norm() + b.norm(), pc - 2.0) * dab;
                c1_dual.observe((ga - gb).norm() / den, {a.x, a.y, b.x, b.y});
                c_dual.observe(std::abs(ca - cb) / u_p(pc, a, b), {a.x, a.y, b.x, b.y});
            }
            const double mix = t * ca + (1.0 - t) * cb;
            const double defect = mix - spec.dual(a * t + b * (1.0 - t));
            conj_convex.observe(guarded_ratio(t * (1.0 - t) * v_p(pc, a, b), defect, mix), {a.x, a.y, b.x, b.y, t});

            const Vec2 z = s.point();
            const double dzb = (b - z).norm();
            if (dzb > 0.0) {
                const double den = std::pow(a.norm() + b.norm() + z.norm(), p - 1.0) * dzb;
                vdiff.observe(std::abs(v_p(p, a, b) - v_p(p, a, z)) / den, {a.x, a.y, b.x, b.y, z.x, z.y});
            }

            // Fenchel–Young: generic pair (x = b, ξ = a) and the equality case ξ = ∇c(x).
            const double cx = spec.cost(b);
            const double gap = cx + ca - dot(a, b);
            fy_min = std::min(fy_min, gap / (1.0 + cx + ca));
            const Vec2 xi = spec.grad(b);
            const double eq = cx + spec.dual(xi) - dot(xi, b);
            fy_eq = std::max(fy_eq, std::abs(eq) / (1.0 + std::pow(b.norm(), p)));
            round_trip = std::max(round_trip, (spec.grad(ga) - a).norm() / (1.0 + a.norm()));
        }
        for (Tracker* tr : {&growth_dual, &size_dual, &c1_dual, &c_dual, &conj_convex, &vdiff})
            rep.checks.push_back(tr->finish());

        rep.fenchel_young_min_gap = fy_min;
        rep.fenchel_young_max_equality_gap = fy_eq;
        rep.round_trip_max_error = round_trip;
        AssumptionCheck fy;
        fy.name = "fenchel_young";
        fy.worst_constant = std::max(-fy_min / 1e-10, fy_eq / 1e-8);
        fy.allowed_constant = 1.0;
        fy.derived = true;
        fy.pass = fy_min >= -1e-10 && fy_eq <= 1e-8;
        rep.checks.push_back(fy);
    }
    rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const auto& c) { return c.pass; });
    return rep;
}

} // namespace otlin
