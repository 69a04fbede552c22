#include "otlin/trajectory.hpp"
#include "otlin/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace otlin {

std::optional<CrossingTimes> crossing_times(const Trajectory& traj, double R)
{
    if (!(R > 0.0)) throw Error(ErrorKind::InvalidInput, "radius must be positive");
    const Vec2 v = traj.velocity();
    const double a = v.norm2();
    const double c0 = traj.x.norm2() - R * R;
    if (a == 0.0) {
        if (c0 <= 0.0) return CrossingTimes{0.0, 1.0};
        return std::nullopt;
    }
    const double b = 2.0 * dot(traj.x, v);
    const double disc = b * b - 4.0 * a * c0;
    if (disc < 0.0) return std::nullopt;
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    double t1, t2;
    if (q == 0.0) {
        t1 = t2 = 0.0;
    } else {
        t1 = q / a;
        t2 = c0 / q;
    }
    if (t1 > t2) std::swap(t1, t2);
    if (t2 < 0.0 || t1 > 1.0) return std::nullopt;
    return CrossingTimes{std::max(t1, 0.0), std::min(t2, 1.0)};
}

std::vector<Trajectory> trajectories(const TransportPlan& plan)
{
    std::vector<Trajectory> out;
    out.reserve(plan.entries.size());
    for (const auto& e : plan.entries) out.push_back({plan.x(e), plan.y(e), e.mass});
    return out;
}

namespace {

Vec2 onto_sphere(Vec2 z, double R)
{
    const double n = z.norm();
    return n > 0.0 ? z * (R / n) : z;
}

} // namespace

BoundaryAtoms boundary_atoms(const TransportPlan& plan, double R)
{
    BoundaryAtoms out;
    out.f.dim = out.g.dim = plan.source->dim;
    const Ball B{{}, R};
    for (const auto& e : plan.entries) {
        const Trajectory tr{plan.x(e), plan.y(e), e.mass};
        const auto ct = crossing_times(tr, R);
        if (!ct) continue;
        if (!B.contains(tr.x)) out.f.add(onto_sphere(tr.at(ct->sigma), R), e.mass);
        if (!B.contains(tr.y)) out.g.add(onto_sphere(tr.at(ct->tau), R), e.mass);
    }
    return out;
}

std::pair<BoundaryData, BoundaryData> entry_exit_measures(const TransportPlan& plan, double R, int n_theta)
{
    const BoundaryAtoms atoms = boundary_atoms(plan, R);
    return {radial_project(atoms.f, R, n_theta), radial_project(atoms.g, R, n_theta)};
}

namespace {

std::vector<long> local_lookup(std::size_t n, const std::vector<std::size_t>& index)
{
    std::vector<long> lookup(n, -1);
    for (std::size_t k = 0; k < index.size(); ++k) lookup[index[k]] = static_cast<long>(k);
    return lookup;
}

std::vector<std::vector<std::pair<std::size_t, double>>> plan_rows(const LocalUniformPlan& lp)
{
    std::vector<std::vector<std::pair<std::size_t, double>>> rows(lp.local.size());
    for (const auto& e : lp.plan.entries) rows[e.i].emplace_back(e.j, e.mass);
    return rows;
}

} // namespace

BoundaryApproximator::BoundaryApproximator(const TransportPlan& plan, const CostSpec& cost, int resolution, double scale)
    : BoundaryApproximator(plan, local_uniform_plan(*plan.source, scale, cost, resolution),
                           local_uniform_plan(*plan.target, scale, cost, resolution))
{
}

BoundaryApproximator::BoundaryApproximator(const TransportPlan& plan, LocalUniformPlan lambda_side,
                                           LocalUniformPlan mu_side)
    : plan_(plan), lam_(std::move(lambda_side)), mu_(std::move(mu_side))
{
    lam_local_ = local_lookup(plan.source->size(), lam_.index);
    mu_local_ = local_lookup(plan.target->size(), mu_.index);
    lam_rows_ = plan_rows(lam_);
    mu_rows_ = plan_rows(mu_);
}

ApproxBoundary BoundaryApproximator::at(double R, int n_theta, double r) const
{
    ApproxBoundary out;
    const int dim = plan_.source->dim;
    const Ball B{{}, R};
    std::vector<double> fq(lam_.uniform.size(), 0.0), gq(mu_.uniform.size(), 0.0);
    DiscreteMeasure f_extra, g_extra;
    f_extra.dim = g_extra.dim = dim;

    auto push = [](const LocalUniformPlan& side, const std::vector<long>& lookup,
                   const std::vector<std::vector<std::pair<std::size_t, double>>>& rows, std::size_t atom, Vec2 point,
                   double mass, std::vector<double>& acc, DiscreteMeasure& extra) {
        const long loc = lookup[atom];
        if (loc < 0) {
            extra.add(point, mass);
            return;
        }
        const double w = side.local.weights[static_cast<std::size_t>(loc)];
        for (const auto& [z, mz] : rows[static_cast<std::size_t>(loc)]) acc[z] += mass * mz / w;
    };

    for (const auto& e : plan_.entries) {
        const Trajectory tr{plan_.x(e), plan_.y(e), e.mass};
        if (!crossing_times(tr, R)) continue;
        if (!B.contains(tr.x)) push(lam_, lam_local_, lam_rows_, e.i, tr.x, e.mass, fq, f_extra);
        if (!B.contains(tr.y)) push(mu_, mu_local_, mu_rows_, e.j, tr.y, e.mass, gq, g_extra);
    }

    auto assemble = [&](const LocalUniformPlan& side, const std::vector<double>& acc, const DiscreteMeasure& extra,
                        DiscreteMeasure& out_measure, double& ratio) {
        out_measure.dim = dim;
        for (std::size_t z = 0; z < acc.size(); ++z) {
            if (acc[z] <= 0.0) continue;
            out_measure.add(side.uniform.points[z], acc[z]);
            ratio = std::max(ratio, acc[z] / side.uniform.weights[z]);
        }
        for (std::size_t k = 0; k < extra.size(); ++k) out_measure.add(extra.points[k], extra.weights[k]);
    };
    assemble(lam_, fq, f_extra, out.f_prime, out.density_ratio_f);
    assemble(mu_, gq, g_extra, out.g_prime, out.density_ratio_g);

    out.f_raw = radial_project(out.f_prime, R, n_theta);
    out.g_raw = radial_project(out.g_prime, R, n_theta);
    out.f_bar = mollify_boundary(out.f_raw, r);
    out.g_bar = mollify_boundary(out.g_raw, r);
    out.density_ok = out.density_ratio_f <= 1.05 && out.density_ratio_g <= 1.05;
    return out;
}

ApproxBoundary approximate_boundary_data(const TransportPlan& plan, const CostSpec& cost, double R, int n_theta,
                                         double r, int resolution)
{
    const BoundaryApproximator approx(plan, cost, resolution);
    return approx.at(R, n_theta, r);
}

std::vector<double> default_radius_candidates()
{
    std::vector<double> c;
    for (int k = 0; k <= 10; ++k) c.push_back(2.05 + 0.09 * k);
    return c;
}

double crossing_cost(const TransportPlan& plan, const CostSpec& cost, double R)
{
    double s = 0.0;
    for (const auto& e : plan.entries) {
        const Vec2 x = plan.x(e);
        const Vec2 y = plan.y(e);
        const double hi = std::max(x.norm(), y.norm());
        const Vec2 v = y - x;
        const double a = v.norm2();
        const double t = a > 0.0 ? std::clamp(-dot(x, v) / a, 0.0, 1.0) : 0.0;
        const double lo = (x + v * t).norm();
        if (lo <= R && R <= hi) s += e.mass * cost.cost(x - y);
    }
    return s;
}

RadiusSelection select_radius(const TransportPlan& plan, const BoundaryApproximator& approx, const CostSpec& cost,
                              const std::vector<double>& candidates, int n_theta, double r, int resolution)
{
    if (candidates.size() < 3) throw Error(ErrorKind::InvalidInput, "radius selection needs at least 3 candidates");
    RadiusSelection sel;
    double best = std::numeric_limits<double>::infinity();
    for (double R : candidates) {
        RadiusScore s{};
        s.R = R;
        s.crossing_cost = crossing_cost(plan, cost, R);
        s.D_R = data_D(*plan.source, *plan.target, R, cost, resolution).value;
        const ApproxBoundary ab = approx.at(R, n_theta, r);
        s.boundary_lp = ab.f_bar.lp_integral(cost.p()) + ab.g_bar.lp_integral(cost.p());
        s.score = s.crossing_cost + s.D_R + s.boundary_lp;
        sel.scores.push_back(s);
    }
    for (const auto& s : sel.scores)
        if (s.score < best || (s.score == best && s.R < sel.R_star)) {
            best = s.score;
            sel.R_star = s.R;
        }
    return sel;
}

Displacement linfty_displacement(const TransportPlan& plan, const CostSpec& cost, double E4_plus_D4)
{
    Displacement d;
    const int dim = plan.source->dim;
    d.exponent = 1.0 / (cost.p() + dim);
    const Ball B3{{}, 3.0};
    for (const auto& e : plan.entries)
        if (B3.contains(plan.x(e)) || B3.contains(plan.y(e))) d.sup_disp = std::max(d.sup_disp, (plan.x(e) - plan.y(e)).norm());
    if (d.sup_disp > 0.0) d.bound_check = d.sup_disp / std::pow(E4_plus_D4, d.exponent);
    return d;
}

std::vector<std::pair<double, double>> gauss_legendre(int order)
{
    if (order < 1) throw Error(ErrorKind::InvalidInput, "quadrature order must be positive");
    std::vector<std::pair<double, double>> nodes;
    const int n = order;
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes.emplace_back(0.5 * (1.0 - x), 0.5 * w);
    }
    std::sort(nodes.begin(), nodes.end());
    return nodes;
}

double path_integral(const Trajectory& traj, const PointField& h, double t0, double t1, int order)
{
    if (!(t0 >= 0.0 && t1 <= 1.0 && t0 <= t1)) throw Error(ErrorKind::InvalidInput, "path interval must lie in [0,1]");
    double s = 0.0;
    for (const auto& [t, w] : gauss_legendre(order)) s += w * h(traj.at(t0 + (t1 - t0) * t));
    return s * (t1 - t0);
}

} // namespace otlin
