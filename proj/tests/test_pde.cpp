#include "otlin/error.hpp"
#include "otlin/neumann.hpp"
#include "pde_oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace otlin;
using namespace otlin::testing;

namespace {

CostSpec radial(double p)
{
    return CostSpec::radial(p, p == 2.0 ? 2.0 : (p < 2.0 ? 4.0 : 5.0));
}

/// ±1 on the upper and lower half circles.
BoundaryData step_data(double R, int n_theta)
{
    auto g = BoundaryData::zeros(2, R, n_theta);
    for (int k = 0; k < n_theta; ++k) g.mass[k] = (k < n_theta / 2 ? 1.0 : -1.0) * g.arc_length();
    return g;
}

} // namespace

TEST_CASE("mesh: coarse disk, area deficit and boundary radius")
{
    const DiskMesh m = build_mesh(1.0, 0.5);
    CHECK(m.triangles.size() >= 4);
    CHECK(m.area() == doctest::Approx(std::numbers::pi).epsilon(0.1));
    CHECK(m.area() < std::numbers::pi);
    CHECK(m.max_diameter() <= 1.5 * 0.5 + 1e-12);
    for (const auto& e : m.boundary_edges) {
        CHECK(std::abs(m.nodes[static_cast<std::size_t>(e.a)].norm() - 1.0) < 1e-10);
        CHECK(std::abs(m.nodes[static_cast<std::size_t>(e.b)].norm() - 1.0) < 1e-10);
    }
}

TEST_CASE("mesh: area converges at O(h²), halving h quadruples the triangle count")
{
    const DiskMesh a = build_mesh(2.0, 0.2), b = build_mesh(2.0, 0.1);
    const double ratio = static_cast<double>(b.triangles.size()) / static_cast<double>(a.triangles.size());
    CHECK(ratio >= 3.2);
    CHECK(ratio <= 4.8);
    const double ea = 4.0 * std::numbers::pi - a.area(), eb = 4.0 * std::numbers::pi - b.area();
    CHECK(ea / eb > 3.0);
    for (const DiskMesh* m : {&a, &b}) {
        CHECK(m->max_diameter() <= 1.5 * m->h + 1e-12);
        double s = 0.0;
        for (std::size_t t = 0; t < m->triangles.size(); ++t) {
            CHECK(m->areas[t] > 0.0);
            s += m->areas[t];
        }
        CHECK(s == doctest::Approx(m->area()));
    }
}

TEST_CASE("mesh: locate inside, on the chord gap and outside")
{
    const DiskMesh m = build_mesh(1.0, 0.2);
    const auto in = m.locate({0.3, -0.2});
    CHECK_FALSE(in.clamped);
    CHECK(in.bary[0] + in.bary[1] + in.bary[2] == doctest::Approx(1.0));
    const auto gap = m.locate({0.0, 0.9999});
    CHECK(gap.triangle >= 0);
    CHECK_THROWS_AS(m.locate({2.0, 0.0}), Error);
    const auto out = m.locate({2.0, 0.0}, true);
    CHECK(out.clamped);
}

TEST_CASE("mesh: CSV output")
{
    const DiskMesh m = build_mesh(1.0, 0.5);
    std::ostringstream nodes, tris;
    write_nodes_csv(nodes, m);
    write_triangles_csv(tris, m);
    CHECK(nodes.str().rfind("node_id,x,y\n", 0) == 0);
    CHECK(tris.str().rfind("tri_id,a,b,c\n", 0) == 0);
}

TEST_CASE("neumann: compatibility of the assembled data")
{
    auto mesh = std::make_shared<const DiskMesh>(build_mesh(1.5, 0.15));
    const auto prob = make_neumann_problem(mesh, radial(3.0), step_data(1.5, 200));
    CHECK(prob.compatibility <= 1e-10);
    const auto g1 = make_neumann_problem(mesh, radial(2.0), unit_flux_data(1.5, 64));
    CHECK(g1.c_R == doctest::Approx(-2.0 * std::numbers::pi * 1.5 / mesh->area()));
    CHECK_THROWS_AS(make_neumann_problem(mesh, radial(2.0), unit_flux_data(1.0, 64)), Error);
}

TEST_CASE("neumann: zero data gives the zero field")
{
    auto mesh = std::make_shared<const DiskMesh>(build_mesh(1.0, 0.2));
    for (double p : {1.5, 2.0, 3.0}) {
        const auto prob = make_neumann_problem(mesh, radial(p), BoundaryData::zeros(2, 1.0, 32));
        const auto sol = solve_neumann(prob);
        for (double v : sol.phi.values) CHECK(v == 0.0);
        for (const Vec2& F : flux_field(sol.phi, prob.cost)) CHECK(F.norm() == 0.0);
        const auto diag = regularity_diagnostics(prob, sol.phi, {});
        CHECK(diag.energy_ratio == 0.0);
        CHECK(diag.interior_ratio == 0.0);
    }
}

TEST_CASE("neumann: p = 2 Newton matches the direct linear solve")
{
    auto mesh = std::make_shared<const DiskMesh>(build_mesh(1.5, 0.1));
    const auto prob = make_neumann_problem(mesh, radial(2.0), step_data(1.5, 256));
    const auto lin = solve_linear_p2(prob);
    const auto sol = solve_neumann(prob, 1e-10);
    double err = 0.0;
    for (std::size_t i = 0; i < lin.values.size(); ++i) err = std::max(err, std::abs(lin.values[i] - sol.phi.values[i]));
    CHECK(err < 1e-8);
}

TEST_CASE("neumann: solver invariants on nonlinear data")
{
    auto mesh = std::make_shared<const DiskMesh>(build_mesh(1.0, 0.1));
    for (double p : {1.5, 3.0}) {
        const auto prob = make_neumann_problem(mesh, radial(p), step_data(1.0, 256));
        const auto sol = solve_neumann(prob);
        CHECK(sol.info.monotone);
        CHECK(sol.info.residual <= sol.info.threshold);
        for (std::size_t k = 1; k < sol.info.energy_history.size(); ++k)
            CHECK(sol.info.energy_history[k] <= sol.info.energy_history[k - 1] + 1e-12 * (1.0 + std::abs(sol.info.energy_history[k - 1])));
        CHECK(std::abs(sol.phi.mean()) < 1e-12);
        // the minimiser has lower energy than nearby perturbations
        auto pert = sol.phi.values;
        for (std::size_t i = 0; i < pert.size(); ++i) pert[i] += 1e-3 * std::sin(3.0 * static_cast<double>(i));
        CHECK(dual_energy(prob, pert) > sol.info.energy);
    }
}

TEST_CASE("neumann: iteration cap reports a numerical error")
{
    auto mesh = std::make_shared<const DiskMesh>(build_mesh(1.0, 0.1));
    const auto prob = make_neumann_problem(mesh, radial(3.0), step_data(1.0, 256));
    try {
        solve_neumann(prob, 1e-14, 1);
        FAIL("expected a numerical error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Numerical);
    }
}

TEST_CASE("oracle: p = 2, g = cos θ recovers φ = x₁ with flux (1,0)")
{
    const auto run = run_cos_oracle(0.1, radial(2.0));
    CHECK(run.error < 2e-3);
    auto mesh = std::make_shared<const DiskMesh>(build_mesh(1.0, 0.1));
    const auto prob = make_neumann_problem(mesh, radial(2.0), cos_theta_data(1.0, 4096));
    const auto sol = solve_neumann(prob);
    double dev = 0.0;
    for (const Vec2& F : flux_field(sol.phi, prob.cost)) dev = std::max(dev, (F - Vec2{1.0, 0.0}).norm());
    CHECK(dev < 0.05);
    // ∫|Dφ|² = π against ∫cos² = π
    const auto diag = regularity_diagnostics(prob, sol.phi, {});
    CHECK(diag.energy_ratio == doctest::Approx(1.0).epsilon(0.05));
    const auto hp = holder_product_check(sol.phi, prob.cost, 0.9);
    CHECK(hp.lhs < 0.05);
}

TEST_CASE("oracle: radial flux r/R for g ≡ 1")
{
    for (double p : {1.5, 2.0, 3.0}) {
        auto mesh = std::make_shared<const DiskMesh>(build_mesh(1.0, 0.1, oracle_grading(p)));
        const auto prob = make_neumann_problem(mesh, radial(p), unit_flux_data(1.0, 4096));
        const auto sol = solve_neumann(prob);
        CHECK(prob.c_R == doctest::Approx(-2.0 * std::numbers::pi / mesh->area()));
        const auto F = flux_field(sol.phi, prob.cost);
        double dev = 0.0;
        for (std::size_t t = 0; t < F.size(); ++t) {
            const Vec2 c = mesh->centroid(static_cast<int>(t));
            dev = std::max(dev, std::abs(F[t].norm() - c.norm()));
        }
        CHECK(dev < 0.15);
    }
}

TEST_CASE("oracle: nodal error decreases by at least 3 per halving")
{
    std::vector<OracleRun> cosr, r15, r3;
    for (double h : {0.2, 0.1, 0.05}) {
        cosr.push_back(run_cos_oracle(h, radial(2.0)));
        r15.push_back(run_radial_oracle(h, radial(1.5)));
        r3.push_back(run_radial_oracle(h, radial(3.0)));
    }
    for (const auto* v : {&cosr, &r15, &r3})
        for (std::size_t k = 1; k < v->size(); ++k) {
            INFO("h = " << (*v)[k].h << " errors " << (*v)[k - 1].error << " -> " << (*v)[k].error);
            CHECK((*v)[k - 1].error / (*v)[k].error >= 3.0);
        }
}

TEST_CASE("neumann: discrete flux balance is O(h)")
{
    std::vector<double> bal;
    for (double h : {0.2, 0.1, 0.05}) {
        auto mesh = std::make_shared<const DiskMesh>(build_mesh(1.0, h));
        auto g = step_data(1.0, 512);
        for (double& m : g.mass) m = 1.5 * m + g.arc_length();
        const auto prob = make_neumann_problem(mesh, radial(3.0), g);
        const auto sol = solve_neumann(prob);
        bal.push_back(std::abs(discrete_flux_balance(prob, sol.phi)));
    }
    INFO(bal[0] << " " << bal[1] << " " << bal[2]);
    CHECK(bal[2] < bal[0]);
    CHECK(bal[2] <= 0.5 * 1.5 * bal[1] + 1e-12);
}

TEST_CASE("diagnostics: mollification ladder has a positive fitted exponent")
{
    auto mesh = std::make_shared<const DiskMesh>(build_mesh(1.0, 0.05));
    for (double p : {2.0, 3.0}) {
        const CostSpec c = radial(p);
        const auto g = step_data(1.0, 512);
        const auto prob = make_neumann_problem(mesh, c, g);
        const auto sol = solve_neumann(prob);
        std::vector<std::pair<double, ScalarField>> ladder;
        for (double r : {0.4, 0.2, 0.1, 0.05}) {
            const auto pr = make_neumann_problem(mesh, c, mollify_boundary(g, r));
            ladder.emplace_back(r, solve_neumann(pr).phi);
        }
        const auto d = regularity_diagnostics(prob, sol.phi, ladder);
        INFO("p = " << p << " s = " << d.fitted_s);
        CHECK(d.fitted_s > 0.0);
        CHECK(std::isfinite(d.diff_ratio));
        CHECK(d.energy_ratio > 0.0);
        CHECK(d.alt_energy_ratio > 0.0);
        CHECK(d.interior_ratio > 0.0);
        CHECK(d.diff_integrals.size() == 4);
        for (std::size_t k = 1; k < 4; ++k) CHECK(d.diff_integrals[k] < d.diff_integrals[k - 1]);
    }
}

TEST_CASE("holder product: radial p = 3 ratio finite and stable under refinement")
{
    std::vector<double> ratios;
    for (double h : {0.1, 0.05}) {
        auto mesh = std::make_shared<const DiskMesh>(build_mesh(1.0, h));
        const auto prob = make_neumann_problem(mesh, radial(3.0), unit_flux_data(1.0, 4096));
        const auto hp = holder_product_check(solve_neumann(prob).phi, prob.cost, 0.8);
        CHECK_FALSE(hp.degenerate);
        CHECK(std::isfinite(hp.ratio));
        ratios.push_back(hp.ratio);
    }
    CHECK(ratios[1] / ratios[0] <= 2.0);
    CHECK(ratios[0] / ratios[1] <= 2.0);
}

TEST_CASE("field CSV")
{
    auto mesh = std::make_shared<const DiskMesh>(build_mesh(1.0, 0.5));
    ScalarField f{mesh, std::vector<double>(mesh->nodes.size(), 0.25)};
    std::ostringstream os;
    write_field_csv(os, f);
    CHECK(os.str().rfind("node_id,x,y,phi\n", 0) == 0);
    CHECK(f.eval({0.1, 0.1}) == doctest::Approx(0.25));
    CHECK(f.gradient({0.1, 0.1}).norm() == doctest::Approx(0.0));
}
