#include "otlin/neumann.hpp"
#include "otlin/error.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

namespace otlin {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

void require_mesh(const ScalarField& f)
{
    if (!f.mesh) throw Error(ErrorKind::InvalidInput, "field without a mesh");
}

/// P1 stiffness matrix, optionally weighted per triangle by a symmetric 2×2 tensor.
SpMat assemble(const DiskMesh& m, const std::vector<Mat2>* tensors, double diag_shift, const std::vector<double>* lumped)
{
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(m.triangles.size() * 9 + m.nodes.size());
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        const auto g = m.hat_gradients(static_cast<int>(t));
        const Mat2 A = tensors ? (*tensors)[t] : Mat2{};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                trip.emplace_back(m.triangles[t][a], m.triangles[t][b], m.areas[t] * dot(g[a], A * g[b]));
    }
    if (lumped)
        for (std::size_t i = 0; i < m.nodes.size(); ++i) trip.emplace_back(i, i, diag_shift * (*lumped)[i]);
    SpMat K(static_cast<Eigen::Index>(m.nodes.size()), static_cast<Eigen::Index>(m.nodes.size()));
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

std::vector<Vec2> gradients(const DiskMesh& m, const std::vector<double>& phi)
{
    std::vector<Vec2> out(m.triangles.size());
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        const auto g = m.hat_gradients(static_cast<int>(t));
        Vec2 s{};
        for (int k = 0; k < 3; ++k) s += g[k] * phi[static_cast<std::size_t>(m.triangles[t][k])];
        out[t] = s;
    }
    return out;
}

void remove_mean(const NeumannProblem& prob, std::vector<double>& phi)
{
    double s = 0.0, a = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        s += prob.lumped[i] * phi[i];
        a += prob.lumped[i];
    }
    const double mean = s / a;
    for (double& v : phi) v -= mean;
}

/// Weak residual ∫ ∇c*(Dφ)·Dv − ∫_∂ g v − c_R ∫ v, one entry per hat function.
std::vector<double> residual(const NeumannProblem& prob, const std::vector<Vec2>& grads)
{
    const DiskMesh& m = *prob.mesh;
    std::vector<double> r(m.nodes.size(), 0.0);
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        const Vec2 F = prob.cost.dual_grad(grads[t]);
        const auto g = m.hat_gradients(static_cast<int>(t));
        for (int k = 0; k < 3; ++k) r[static_cast<std::size_t>(m.triangles[t][k])] += m.areas[t] * dot(F, g[k]);
    }
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= prob.load[i] + prob.c_R * prob.lumped[i];
    return r;
}

} // namespace

double ScalarField::eval(Vec2 x, bool allow_outside) const
{
    require_mesh(*this);
    const MeshLocation loc = mesh->locate(x, allow_outside);
    const auto& tri = mesh->triangles[static_cast<std::size_t>(loc.triangle)];
    double v = 0.0;
    for (int k = 0; k < 3; ++k) v += loc.bary[k] * values[static_cast<std::size_t>(tri[k])];
    return v;
}

Vec2 ScalarField::triangle_gradient(int t) const
{
    const auto g = mesh->hat_gradients(t);
    const auto& tri = mesh->triangles[static_cast<std::size_t>(t)];
    Vec2 s{};
    for (int k = 0; k < 3; ++k) s += g[k] * values[static_cast<std::size_t>(tri[k])];
    return s;
}

Vec2 ScalarField::gradient(Vec2 x, bool allow_outside) const
{
    require_mesh(*this);
    return triangle_gradient(mesh->locate(x, allow_outside).triangle);
}

double ScalarField::mean() const
{
    require_mesh(*this);
    double s = 0.0;
    for (std::size_t t = 0; t < mesh->triangles.size(); ++t) {
        double v = 0.0;
        for (int k : mesh->triangles[t]) v += values[static_cast<std::size_t>(k)];
        s += mesh->areas[t] * v / 3.0;
    }
    return s / mesh->area();
}

NeumannProblem make_neumann_problem(std::shared_ptr<const DiskMesh> mesh, const CostSpec& cost, const BoundaryData& g)
{
    if (!mesh) throw Error(ErrorKind::InvalidInput, "problem without a mesh");
    if (g.dim != 2) throw Error(ErrorKind::InvalidInput, "the disk solver needs two-dimensional boundary data");
    if (std::abs(g.radius - mesh->R) > 1e-12 * mesh->R)
        throw Error(ErrorKind::InvalidInput, fmt::format("boundary radius {} differs from mesh radius {}", g.radius, mesh->R));
    NeumannProblem prob{mesh, cost, g, {}, {}, 0.0, 0.0, 0.0};
    const DiskMesh& m = *mesh;
    prob.load.assign(m.nodes.size(), 0.0);
    prob.lumped.assign(m.nodes.size(), 0.0);
    for (std::size_t t = 0; t < m.triangles.size(); ++t)
        for (int k : m.triangles[t]) prob.lumped[static_cast<std::size_t>(k)] += m.areas[t] / 3.0;

    const double w = g.bin_width();
    const int n = g.bins();
    for (const auto& e : m.boundary_edges) {
        const double span = e.theta_b - e.theta_a;
        const int k0 = static_cast<int>(std::floor(e.theta_a / w));
        const int k1 = static_cast<int>(std::ceil(e.theta_b / w));
        for (int k = k0; k < k1; ++k) {
            const double lo = std::max(e.theta_a, k * w);
            const double hi = std::min(e.theta_b, (k + 1) * w);
            if (hi <= lo) continue;
            const double dens = g.density(((k % n) + n) % n) * g.radius;
            const double len = hi - lo;
            const double quad = 0.5 * (hi * hi - lo * lo);
            prob.load[static_cast<std::size_t>(e.a)] += dens * (e.theta_b * len - quad) / span;
            prob.load[static_cast<std::size_t>(e.b)] += dens * (quad - e.theta_a * len) / span;
        }
    }
    double total = 0.0;
    for (double v : prob.load) total += v;
    prob.c_R = -total / m.area();
    prob.compatibility = std::abs(total + prob.c_R * m.area());
    prob.g_lp = std::pow(g.lp_integral(cost.p()), 1.0 / cost.p());
    return prob;
}

double dual_energy(const NeumannProblem& prob, const std::vector<double>& phi)
{
    const DiskMesh& m = *prob.mesh;
    const auto grads = gradients(m, phi);
    double J = 0.0;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) J += m.areas[t] * prob.cost.dual(grads[t]);
    for (std::size_t i = 0; i < phi.size(); ++i) J -= (prob.load[i] + prob.c_R * prob.lumped[i]) * phi[i];
    return J;
}

ScalarField solve_linear_p2(const NeumannProblem& prob)
{
    const DiskMesh& m = *prob.mesh;
    const SpMat K = assemble(m, nullptr, 0.0, nullptr);
    const Eigen::Index n = K.rows() - 1;
    SpMat Kr = K.bottomRightCorner(n, n);
    Vec b(n);
    for (Eigen::Index i = 0; i < n; ++i) b[i] = prob.load[static_cast<std::size_t>(i + 1)] + prob.c_R * prob.lumped[static_cast<std::size_t>(i + 1)];
    Eigen::SimplicialLDLT<SpMat> ldlt(Kr);
    if (ldlt.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "stiffness factorisation failed");
    const Vec x = ldlt.solve(b);
    ScalarField f{prob.mesh, std::vector<double>(m.nodes.size(), 0.0)};
    for (Eigen::Index i = 0; i < n; ++i) f.values[static_cast<std::size_t>(i + 1)] = x[i];
    remove_mean(prob, f.values);
    return f;
}

NeumannSolution solve_neumann(const NeumannProblem& prob, double tol, int max_iter)
{
    if (prob.compatibility > 1e-10 * std::max(1.0, prob.g_lp))
        throw Error(ErrorKind::InvalidInput, fmt::format("incompatible Neumann data (defect {:.3e})", prob.compatibility));
    const DiskMesh& m = *prob.mesh;
    const std::size_t N = m.nodes.size();
    NeumannSolution sol{{prob.mesh, std::vector<double>(N, 0.0)}, {}};
    SolveInfo& info = sol.info;
    info.threshold = tol * (1.0 + prob.g_lp);

    // residual norm in the dual of H¹ (stiffness plus lumped mass)
    Eigen::SimplicialLDLT<SpMat> norm_solver(assemble(m, nullptr, 1.0, &prob.lumped));
    auto dual_norm = [&](const std::vector<double>& r) {
        const Vec rv = Eigen::Map<const Vec>(r.data(), static_cast<Eigen::Index>(N));
        return std::sqrt(std::max(0.0, rv.dot(norm_solver.solve(rv))));
    };

    std::vector<double>& phi = sol.phi.values;
    double total_load = 0.0;
    for (double v : prob.load) total_load += std::abs(v);
    if (total_load == 0.0) {
        info.energy = 0.0;
        info.energy_history.push_back(0.0);
        return sol;
    }

    // start from the best multiple of the linear solution
    const ScalarField lin = solve_linear_p2(prob);
    {
        auto J_of = [&](double s) {
            std::vector<double> v(lin.values);
            for (double& x : v) x *= s;
            return dual_energy(prob, v);
        };
        double lo = 0.0, hi = 1.0;
        while (J_of(2.0 * hi) < J_of(hi) && hi < 1e12) hi *= 2.0;
        hi *= 2.0;
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int i = 0; i < 100; ++i) {
            const double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
            if (J_of(a) < J_of(b)) hi = b; else lo = a;
        }
        const double s = 0.5 * (lo + hi);
        for (std::size_t i = 0; i < N; ++i) phi[i] = s * lin.values[i];
    }

    const SpMat K = assemble(m, nullptr, 0.0, nullptr);
    double J = dual_energy(prob, phi);
    info.energy_history.push_back(J);
    Eigen::SimplicialLDLT<SpMat> hess_solver;
    bool analysed = false;

    for (int it = 0; it < max_iter; ++it) {
        auto grads = gradients(m, phi);
        const auto r = residual(prob, grads);
        info.residual = dual_norm(r);
        info.iterations = it;
        if (info.residual <= info.threshold) {
            info.energy = J;
            return sol;
        }
        double gmax = 0.0;
        for (const Vec2& g : grads) gmax = std::max(gmax, g.norm());
        const double floor = (prob.cost.p_conj() < 2.0 ? 1e-6 : 1e-3) * std::max(gmax, 1e-12);
        std::vector<Mat2> tensors(grads.size());
        double hscale = 0.0;
        for (std::size_t t = 0; t < grads.size(); ++t) {
            tensors[t] = prob.cost.dual_hessian(grads[t], floor);
            hscale = std::max(hscale, tensors[t].a11 + tensors[t].a22);
        }
        SpMat H = assemble(m, &tensors, 1e-10 * hscale, &prob.lumped);
        H += K * (1e-12 * hscale);
        if (!analysed) {
            hess_solver.analyzePattern(H);
            analysed = true;
        }
        hess_solver.factorize(H);
        if (hess_solver.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "Hessian factorisation failed");
        const Vec rv = Eigen::Map<const Vec>(r.data(), static_cast<Eigen::Index>(N));
        Vec d = -hess_solver.solve(rv);
        const double slope = rv.dot(d);
        if (!(slope < 0.0)) d = -rv;

        std::vector<double> dir(d.data(), d.data() + N);
        remove_mean(prob, dir);
        double step = 1.0;
        const double slope_dir = std::inner_product(r.begin(), r.end(), dir.begin(), 0.0);
        std::vector<double> trial(N);
        bool accepted = false;
        double J_new = J;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t i = 0; i < N; ++i) trial[i] = phi[i] + step * dir[i];
            J_new = dual_energy(prob, trial);
            if (J_new <= J + 1e-4 * step * slope_dir) {
                accepted = true;
                break;
            }
            // energy differences below rounding: fall back to residual decrease for the full step
            if (ls == 0 && std::abs(J_new - J) <= 1e-12 * (1.0 + std::abs(J)) &&
                dual_norm(residual(prob, gradients(m, trial))) < 0.5 * info.residual) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // no representable decrease left: accept only if the residual is already at rounding level
            if (info.residual <= std::max(info.threshold, 1e3 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(J))))
                break;
            throw Error(ErrorKind::Numerical,
                        fmt::format("line search stalled at iteration {} with residual {:.3e}", it, info.residual));
        }
        if (J_new > J + 1e-12 * (1.0 + std::abs(J))) info.monotone = false;
        phi.swap(trial);
        remove_mean(prob, phi);
        J = J_new;
        info.energy_history.push_back(J);
    }
    info.energy = J;
    if (info.residual > info.threshold)
        throw Error(ErrorKind::Numerical,
                    fmt::format("no convergence after {} iterations, residual {:.3e}", max_iter, info.residual));
    return sol;
}

std::vector<Vec2> flux_field(const ScalarField& phi, const CostSpec& cost)
{
    require_mesh(phi);
    const auto grads = gradients(*phi.mesh, phi.values);
    std::vector<Vec2> out(grads.size());
    for (std::size_t t = 0; t < grads.size(); ++t) out[t] = cost.dual_grad(grads[t]);
    return out;
}

double discrete_flux_balance(const NeumannProblem& prob, const ScalarField& phi)
{
    const DiskMesh& m = *prob.mesh;
    const auto F = flux_field(phi, prob.cost);
    // boundary edge → owning triangle
    double s = 0.0;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        const auto& tri = m.triangles[t];
        for (int k = 0; k < 3; ++k) {
            const int a = tri[k], b = tri[(k + 1) % 3];
            for (const auto& e : m.boundary_edges)
                if (e.a == a && e.b == b) s += dot(F[t], e.normal) * e.length;
        }
    }
    return s + prob.c_R * m.area();
}

DiagnosticsReport regularity_diagnostics(const NeumannProblem& prob, const ScalarField& phi,
                                         const std::vector<std::pair<double, ScalarField>>& phi_r)
{
    DiagnosticsReport rep;
    const DiskMesh& m = *prob.mesh;
    const CostSpec& c = prob.cost;
    const double pc = c.p_conj();
    rep.g_lp_p = prob.g.lp_integral(c.p());
    const auto grads = gradients(m, phi.values);
    double e1 = 0.0, e2 = 0.0, sup = 0.0;
    const double r_in = m.R - 0.5;
    for (std::size_t t = 0; t < grads.size(); ++t) {
        const double a = std::pow(grads[t].norm(), pc);
        e1 += m.areas[t] * a;
        e2 += m.areas[t] * c.cost(c.dual_grad(grads[t]));
        if (m.centroid(static_cast<int>(t)).norm() < r_in) sup = std::max(sup, a);
    }
    auto safe = [&](double num) { return rep.g_lp_p > 0.0 ? num / rep.g_lp_p : 0.0; };
    rep.energy_ratio = safe(e1);
    rep.alt_energy_ratio = safe(e2);
    rep.interior_ratio = safe(sup);

    for (const auto& [r, f] : phi_r) {
        if (f.mesh.get() != phi.mesh.get()) throw Error(ErrorKind::InvalidInput, "mollified solution on a different mesh");
        const auto gr = gradients(m, f.values);
        double s = 0.0;
        for (std::size_t t = 0; t < gr.size(); ++t) s += m.areas[t] * std::pow((grads[t] - gr[t]).norm(), pc);
        rep.r_values.push_back(r);
        rep.diff_integrals.push_back(s);
    }
    // least-squares slope of log diff against log r
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < rep.r_values.size(); ++k)
        if (rep.diff_integrals[k] > 0.0) pts.emplace_back(std::log(rep.r_values[k]), std::log(rep.diff_integrals[k]));
    if (pts.size() >= 2) {
        double mx = 0, my = 0;
        for (auto [x, y] : pts) {
            mx += x / pts.size();
            my += y / pts.size();
        }
        double sxy = 0, sxx = 0;
        for (auto [x, y] : pts) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
        rep.fitted_s = sxx > 0 ? sxy / sxx : 0.0;
    }
    for (std::size_t k = 0; k < rep.r_values.size(); ++k)
        rep.diff_ratio = std::max(rep.diff_ratio, safe(rep.diff_integrals[k] / std::pow(rep.r_values[k], rep.fitted_s)));
    return rep;
}

HolderProduct holder_product_check(const ScalarField& phi, const CostSpec& cost, double radius, double beta)
{
    require_mesh(phi);
    HolderProduct out;
    const DiskMesh& m = *phi.mesh;
    const auto grads = gradients(m, phi.values);
    std::vector<Vec2> where;
    std::vector<Vec2> g;
    std::vector<double> q;
    for (std::size_t t = 0; t < grads.size(); ++t) {
        const Vec2 c = m.centroid(static_cast<int>(t));
        if (c.norm() >= radius) continue;
        where.push_back(c);
        g.push_back(grads[t]);
        q.push_back(cost.dual(grads[t]) + cost.cost(cost.dual_grad(grads[t])));
        out.sup_grad = std::max(out.sup_grad, grads[t].norm());
    }
    const double sep = 2.0 * m.h;
    for (std::size_t a = 0; a < where.size(); ++a)
        for (std::size_t b = a + 1; b < where.size(); ++b) {
            const double d = (where[a] - where[b]).norm();
            if (d < sep) continue;
            const double w = std::pow(d, beta);
            out.lhs = std::max(out.lhs, std::abs(q[a] - q[b]) / w);
            out.grad_seminorm = std::max(out.grad_seminorm, (g[a] - g[b]).norm() / w);
        }
    out.rhs = std::pow(out.sup_grad, cost.p_conj() - 1.0) * out.grad_seminorm;
    if (out.rhs <= 1e-300) {
        out.degenerate = true;
        return out;
    }
    out.ratio = out.lhs / out.rhs;
    return out;
}

void write_field_csv(std::ostream& os, const ScalarField& phi)
{
    require_mesh(phi);
    os << "node_id,x,y,phi\n";
    for (std::size_t i = 0; i < phi.values.size(); ++i)
        os << fmt::format("{},{:.17g},{:.17g},{:.17g}\n", i, phi.mesh->nodes[i].x, phi.mesh->nodes[i].y, phi.values[i]);
}

} // namespace otlin
