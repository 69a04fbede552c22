#include "otlin/inequalities.hpp"
#include "otlin/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace otlin {

double triangle_constant(double p, double eps)
{
    if (!(p > 1.0) || !(eps > 0.0)) throw Error(ErrorKind::InvalidInput, "triangle constant needs p > 1 and eps > 0");
    const double t = std::pow(1.0 + eps, -1.0 / (p - 1.0));
    return std::pow(1.0 - t, 1.0 - p);
}

TriangleResult triangle_check(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2, const DiscreteMeasure& mu3,
                              double eps, const CostSpec& cost)
{
    if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::InvalidInput, "eps must lie in (0,1)");
    TriangleResult r;
    r.w13 = transport_cost(mu1, mu3, cost);
    r.w12 = transport_cost(mu1, mu2, cost);
    r.w23 = transport_cost(mu2, mu3, cost);
    r.C_used = triangle_constant(cost.p(), eps);
    r.lhs = r.w13;
    r.rhs = (1.0 + eps) * r.w12 + r.C_used * r.w23;
    r.pass = r.lhs <= r.rhs + 1e-9;
    return r;
}

double add_constant_bound(double p)
{
    auto f = [p](double d) { return triangle_constant(p, d) / (1.0 - d); };
    double a = 1e-9, b = 1.0 - 1e-9;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int i = 0; i < 200; ++i) {
        const double m1 = b - g * (b - a), m2 = a + g * (b - a);
        if (f(m1) < f(m2)) b = m2; else a = m1;
    }
    return f(0.5 * (a + b));
}

AddConstantResult add_constant_check(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2, const CostSpec& cost)
{
    AddConstantResult r;
    r.bound = add_constant_bound(cost.p());
    DiscreteMeasure sum = mu1;
    for (std::size_t i = 0; i < mu2.size(); ++i) sum.add(mu2.points[i], mu2.weights[i]);
    DiscreteMeasure twice = mu2;
    for (double& w : twice.weights) w *= 2.0;
    r.numerator = transport_cost(mu1, mu2, cost);
    r.denominator = transport_cost(sum, twice, cost);
    if (r.denominator <= 1e-14 * std::max(1.0, r.numerator)) {
        r.degenerate = true;
        r.pass = r.numerator <= 1e-12;
        return r;
    }
    r.ratio = r.numerator / r.denominator;
    r.pass = r.ratio <= r.bound * (1.0 + 1e-9);
    return r;
}

CellGrid CellGrid::square(double L, double h)
{
    CellGrid g;
    g.n = static_cast<int>(std::ceil(2.0 * L / h));
    g.h = 2.0 * L / g.n;
    g.half_width = L;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            g.centers.push_back({-L + (i + 0.5) * g.h, -L + (j + 0.5) * g.h});
            g.volumes.push_back(g.h * g.h);
        }
    return g;
}

long CellGrid::locate(Vec2 x) const
{
    const long i = static_cast<long>(std::floor((x.x + half_width) / h));
    const long j = static_cast<long>(std::floor((x.y + half_width) / h));
    if (i < 0 || j < 0 || i >= n || j >= n) return -1;
    return j * n + i;
}

ActionResult benamou_brenier_action(const std::vector<FlowSnapshot>& path, const CellGrid& grid, const CostSpec& cost)
{
    ActionResult out;
    if (path.empty()) return out;
    const double dt = 1.0 / static_cast<double>(path.size());
    static constexpr double kScales[] = {0.25, 0.5, 0.75, 1.0, 1.25, 2.0};
    std::vector<double> family(std::size(kScales), 0.0);
    for (const auto& snap : path) {
        if (snap.rho.size() != grid.size() || snap.j.size() != grid.size())
            throw Error(ErrorKind::InvalidInput, "snapshot does not match the grid");
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double rho = snap.rho[k];
            const Vec2 j = snap.j[k];
            if (rho < 0.0) throw Error(ErrorKind::InvalidInput, "negative density");
            if (rho == 0.0) {
                if (j.norm() > 0.0) throw Error(ErrorKind::InvalidInput, fmt::format("flux without density in cell {}", k));
                continue;
            }
            const double w = grid.volumes[k] * dt;
            const Vec2 v = j / rho;
            out.direct += w * rho * cost.cost(v);
            const Vec2 xi = cost.grad(v);
            for (std::size_t s = 0; s < std::size(kScales); ++s) {
                const Vec2 z = xi * kScales[s];
                family[s] += w * (dot(z, j) - cost.dual(z) * rho);
            }
        }
    }
    out.duality = *std::max_element(family.begin(), family.end());
    out.pass = out.duality <= out.direct * (1.0 + 1e-12) + 1e-14;
    return out;
}

std::vector<FlowSnapshot> displacement_flow(const TransportPlan& plan, const CellGrid& grid, int n_t)
{
    std::vector<FlowSnapshot> path(static_cast<std::size_t>(n_t));
    for (int s = 0; s < n_t; ++s) {
        const double t = (s + 0.5) / n_t;
        auto& snap = path[static_cast<std::size_t>(s)];
        snap.rho.assign(grid.size(), 0.0);
        snap.j.assign(grid.size(), Vec2{});
        for (const auto& e : plan.entries) {
            const Trajectory tr{plan.x(e), plan.y(e), e.mass};
            const long k = grid.locate(tr.at(t));
            if (k < 0) throw Error(ErrorKind::Extrapolation, "trajectory leaves the grid");
            const double vol = grid.volumes[static_cast<std::size_t>(k)];
            snap.rho[static_cast<std::size_t>(k)] += e.mass / vol;
            snap.j[static_cast<std::size_t>(k)] += tr.velocity() * (e.mass / vol);
        }
    }
    return path;
}

HolderTestResult c2measures_check(const std::function<double(Vec2)>& xi, double alpha, const DiscreteMeasure& mu,
                                  double R, const CostSpec& cost, int resolution)
{
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorKind::InvalidInput, "alpha must lie in (0,1]");
    HolderTestResult r;
    const LocalUniformPlan lp = local_uniform_plan(mu, R, cost, resolution);
    const double p = cost.p();
    const int d = mu.dim;

    double a = 0.0, b = 0.0;
    std::vector<Vec2> pts;
    std::vector<double> vals;
    for (std::size_t i = 0; i < lp.local.size(); ++i) {
        const double v = xi(lp.local.points[i]);
        a += lp.local.weights[i] * v;
        pts.push_back(lp.local.points[i]);
        vals.push_back(v);
    }
    for (std::size_t i = 0; i < lp.uniform.size(); ++i) {
        const double v = xi(lp.uniform.points[i]);
        b += lp.uniform.weights[i] * v;
        pts.push_back(lp.uniform.points[i]);
        vals.push_back(v);
    }
    r.lhs = std::abs(a - b);
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t k = i + 1; k < pts.size(); ++k) {
            const double dist = (pts[i] - pts[k]).norm();
            if (dist > 0.0) r.seminorm = std::max(r.seminorm, std::abs(vals[i] - vals[k]) / std::pow(dist, alpha));
        }
    r.wc = lp.cost;
    r.rhs = r.seminorm * std::pow(r.wc, alpha / p) * std::pow(R, 2.0 * d * (p - alpha) / p);
    const double mass = lp.local.mass();
    r.K = std::pow(cost.lambda_cap(), alpha / p) * std::pow(mass, 1.0 - alpha / p) *
          std::pow(R, -2.0 * d * (p - alpha) / p);
    r.pass = r.lhs <= r.K * r.rhs * (1.0 + 1e-9) + 1e-12;
    return r;
}

LocalisationResult localisation_check(const TransportPlan& plan, double R, const CostSpec& cost, double delta,
                                      double tau_tolerance, double smallness)
{
    LocalisationResult r;
    r.smallness = smallness;
    for (const auto& e : plan.entries)
        if (crossing_times({plan.x(e), plan.y(e), e.mass}, R)) r.lhs += e.mass * cost.cost(plan.x(e) - plan.y(e));
    const Ball B{{}, R};
    const BoundaryAtoms atoms = boundary_atoms(plan, R);
    DiscreteMeasure left = restrict(*plan.source, B);
    DiscreteMeasure right = restrict(*plan.target, B);
    for (std::size_t i = 0; i < atoms.f.size(); ++i) left.add(atoms.f.points[i], atoms.f.weights[i]);
    for (std::size_t i = 0; i < atoms.g.size(); ++i) right.add(atoms.g.points[i], atoms.g.weights[i]);
    r.w_local = transport_cost(left, right, cost);
    r.rhs = (1.0 + delta) * r.w_local + tau_tolerance * smallness;
    r.pass = r.lhs <= r.rhs + 1e-9;
    return r;
}

DataRestrictionResult data_restriction_check(const DiscreteMeasure& mu, const CostSpec& cost,
                                             const std::vector<double>& radii, int resolution)
{
    if (radii.size() < 2) throw Error(ErrorKind::InvalidInput, "data restriction needs at least two radii");
    DataRestrictionResult r;
    r.radii = radii;
    std::sort(r.radii.begin(), r.radii.end());
    for (double R : r.radii) {
        const int res = std::max(2, static_cast<int>(std::ceil(resolution * R / 4.0)));
        r.integrand.push_back(data_half(mu, R, cost, res).value);
    }
    for (std::size_t k = 0; k + 1 < r.radii.size(); ++k)
        r.integral_estimate += 0.5 * (r.integrand[k] + r.integrand[k + 1]) * (r.radii[k + 1] - r.radii[k]);
    r.D4 = data_half(mu, 4.0, cost, resolution).value;
    if (r.D4 <= 1e-14) {
        r.degenerate = true;
        return r;
    }
    r.ratio = r.integral_estimate / r.D4;
    return r;
}

} // namespace otlin
