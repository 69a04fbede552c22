#include "otlin/harness.hpp"
#include "otlin/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace otlin;

namespace {

CostSpec radial(double p) { return CostSpec::radial(p, p == 2.0 ? 2.0 : (p == 3.0 ? 5.0 : 4.0)); }

/// Coarse sine-flow instance, about 380 atoms.
std::pair<DiscreteMeasure, DiscreteMeasure> coarse(double a, Vec2 k = {0.5, 0.0})
{
    InstanceFamily f;
    f.scale = a;
    f.spacing = 0.4;
    f.wave = k;
    return generate(f, 1);
}

LinearizationConfig fast_config()
{
    LinearizationConfig c;
    c.data_resolution = 12;
    c.mesh_h = 0.2;
    c.gate = 5.0;
    c.solve_raw = false;
    return c;
}

} // namespace

TEST_CASE("pipeline: identity coupling has zero solution and zero error")
{
    InstanceFamily f;
    f.kind = FamilyKind::Identity;
    f.spacing = 0.4;
    const auto [lam, mu] = generate(f, 1);
    const auto rep = run_linearization(lam, mu, radial(2.0), 0.1, fast_config());
    CHECK(rep.lhs_main == 0.0);
    CHECK(rep.smallness.E4_plain == 0.0);
    CHECK(rep.c_R == 0.0);
    CHECK(rep.ledger.lhs_V == 0.0);
    CHECK(rep.ledger.rhs == 0.0);
    CHECK(rep.sup_gradient == 0.0);
    CHECK(rep.ledger.pass);
}

TEST_CASE("pipeline: p = 2 ledger matches the expand-the-squares identity")
{
    for (double a : {0.3, 0.15}) {
        const auto [lam, mu] = coarse(a);
        const auto rep = run_linearization(lam, mu, radial(2.0), 0.1, fast_config());
        const auto& L = rep.ledger;
        CHECK(std::abs(L.rhs - L.time_slack - 0.5 * L.lhs_V) <= 1e-10);
        CHECK(L.identity_defect <= 1e-10);
        CHECK(L.pass);
    }
}

TEST_CASE("pipeline: ledger inequality on 20 instances with p in {1.5, 3}")
{
    int n = 0;
    for (double p : {1.5, 3.0})
        for (int k = 0; k < 10; ++k, ++n) {
            const double ang = 0.6 * k;
            const auto [lam, mu] = coarse(0.1 + 0.02 * k, Vec2{0.5 * std::cos(ang), 0.5 * std::sin(ang)});
            const auto rep = run_linearization(lam, mu, radial(p), 0.1, fast_config());
            INFO("p = " << p << " k = " << k);
            CHECK(rep.ledger.pass);
            CHECK(rep.ledger.identity_defect <= 1e-9 * (1.0 + rep.ledger.rhs));
            CHECK(rep.ledger.convexity_constant * rep.ledger.lhs_V <= rep.ledger.rhs + 1e-8);
        }
    CHECK(n == 20);
}

TEST_CASE("pipeline: the ledger holds for any potential, and a tilt enlarges the pairing term")
{
    const CostSpec cost = radial(2.0);
    const auto [lam, mu] = coarse(0.25);
    const auto plan = solve_exact(lam, mu, cost);
    const double R = 2.5;
    const BoundaryApproximator approx(plan, cost, 12);
    const auto ab = approx.at(R, 64, LinearizationConfig{}.mollify_radius());
    auto mesh = std::make_shared<const DiskMesh>(build_mesh(R, 0.2));
    const auto sol = solve_neumann(make_neumann_problem(mesh, cost, ab.g_bar - ab.f_bar));
    ScalarField tilted = sol.phi;
    for (std::size_t i = 0; i < tilted.values.size(); ++i) tilted.values[i] += mesh->nodes[i].x;

    const auto s = compute_smallness(plan, cost, 12);
    const auto base = quasi_orthogonality_ledger(plan, sol.phi, R, cost);
    const auto tilt = quasi_orthogonality_ledger(plan, tilted, R, cost);
    CHECK(base.pass);
    CHECK(tilt.pass);
    const auto tb = term_estimates(plan, sol.phi, R, cost, 0.1, s, 1.0);
    const auto tt = term_estimates(plan, tilted, R, cost, 0.1, s, 1.0);
    CHECK(std::abs(tt.pairing) > 5.0 * std::abs(tb.pairing));
    CHECK(tb.pairing == doctest::Approx(-base.term_b).epsilon(1e-9));
}

TEST_CASE("pipeline: lhs_main does not depend on the tolerance")
{
    const auto [lam, mu] = coarse(0.2);
    const auto a = run_linearization(lam, mu, radial(2.0), 0.1, fast_config());
    const auto b = run_linearization(lam, mu, radial(2.0), 0.5, fast_config());
    CHECK(a.lhs_main == b.lhs_main);
    CHECK(a.R_selected == b.R_selected);
    CHECK(b.terms.budget > a.terms.budget);
}

TEST_CASE("pipeline: two runs give byte-identical reports")
{
    const auto [lam, mu] = coarse(0.2);
    ExperimentConfig cfg;
    const auto a = report_json(run_linearization(lam, mu, radial(3.0), 0.1, fast_config()), cfg);
    const auto b = report_json(run_linearization(lam, mu, radial(3.0), 0.1, fast_config()), cfg);
    CHECK(a == b);
}

TEST_CASE("interval: closed-form flux")
{
    const CostSpec cost = radial(3.0);
    auto net = BoundaryData::zeros(1, 2.0, 2);
    net.mass = {1.0, 1.0};  // unit outflow at both ends
    const auto s = IntervalSolution::solve(net, cost);
    CHECK(s.c_R == doctest::Approx(-0.5));
    CHECK(s.flux(2.0) == doctest::Approx(1.0));
    CHECK(s.flux(-2.0) == doctest::Approx(-1.0));
    CHECK(cost.dual_grad(s.gradient({1.0, 0.0})).x == doctest::Approx(s.flux(1.0)));

    net.mass = {-0.5, 0.5};  // a through-flow
    const auto t = IntervalSolution::solve(net, cost);
    CHECK(t.c_R == doctest::Approx(0.0));
    CHECK(t.flux(-1.3) == doctest::Approx(0.5));
    CHECK(t.flux(1.7) == doctest::Approx(0.5));
    CHECK_THROWS_AS(IntervalSolution::solve(BoundaryData::zeros(2, 1.0, 8), cost), Error);
}

TEST_CASE("interval: one-dimensional translation runs end to end")
{
    InstanceFamily f;
    f.dim = 1;
    f.spacing = 0.05;
    f.scale = 0.1;
    const auto [lam, mu] = generate(f, 1);
    for (double p : {1.5, 2.0, 3.0}) {
        const auto rep = run_linearization(lam, mu, radial(p), 0.1, fast_config());
        CHECK(rep.dim == 1);
        CHECK(rep.ledger.pass);
        CHECK(std::isfinite(rep.lhs_main));
        // translation: the flux is a constant close to the displacement
        CHECK(rep.lhs_main <= 0.1 * rep.smallness.E4_total);
    }
}

TEST_CASE("study: CSV layout, slope and the degenerate identity family")
{
    InstanceGenerator sine = [](double a) { return coarse(a); };
    const auto st = scaling_study(sine, {0.3, 0.2, 0.1}, radial(2.0), 0.1, fast_config());
    REQUIRE(st.rows.size() == 3);
    for (const auto& r : st.rows) CHECK(r.error.empty());
    CHECK(st.rows[0].scale == 0.3);
    CHECK(std::isfinite(st.slope));
    CHECK_FALSE(st.degenerate);
    std::ostringstream csv, dat;
    write_study_csv(csv, st);
    write_study_dat(dat, st);
    const std::string text = csv.str();
    CHECK(text.rfind("scale,seed,E4,D4,lhs_main,sup_disp,R_selected,gradient_ratio\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);

    InstanceGenerator same = [](double) {
        InstanceFamily f;
        f.kind = FamilyKind::Identity;
        f.spacing = 0.4;
        return generate(f, 1);
    };
    const auto id = scaling_study(same, {1, 2, 3}, radial(2.0), 0.1, fast_config());
    CHECK(id.degenerate);
    for (const auto& r : id.rows) CHECK(r.lhs_main == 0.0);
    CHECK_THROWS_AS(scaling_study(sine, {0.1, 0.2}, radial(2.0), 0.1, fast_config()), Error);
}

TEST_CASE("study: several seeds per scale, scale-major rows, pooled slope")
{
    SeededGenerator gen = [](double a, std::uint64_t seed) {
        InstanceFamily f;
        f.scale = a;
        f.spacing = 0.4;
        f.rotate_wave = true;
        return generate(f, seed);
    };
    const auto st = scaling_study(gen, {0.3, 0.2, 0.1}, {4, 9}, radial(2.0), 0.1, fast_config());
    REQUIRE(st.rows.size() == 6);
    CHECK(st.rows[0].scale == 0.3);
    CHECK(st.rows[1].scale == 0.3);
    CHECK(st.rows[0].seed == 4);
    CHECK(st.rows[1].seed == 9);
    CHECK(st.rows[5].scale == 0.1);
    CHECK(st.rows[0].lhs_main != st.rows[1].lhs_main);
    std::vector<double> e, l;
    for (const auto& r : st.rows) {
        CHECK(r.error.empty());
        e.push_back(r.E4);
        l.push_back(r.lhs_main);
    }
    CHECK(st.slope == loglog_slope(e, l));
    CHECK_THROWS_AS(scaling_study(gen, {0.3, 0.2, 0.1}, {}, radial(2.0), 0.1, fast_config()), Error);
}

TEST_CASE("slope: exact power law")
{
    CHECK(loglog_slope({1, 2, 4, 8}, {3, 12, 48, 192}) == doctest::Approx(2.0));
    CHECK(std::isnan(loglog_slope({1}, {1})));
}

TEST_CASE("gate: excess smallness is reported with the partial report")
{
    const auto [lam, mu] = coarse(0.3);
    auto cfg = fast_config();
    cfg.gate = 1e-6;
    try {
        run_linearization(lam, mu, radial(2.0), 0.1, cfg);
        FAIL("expected a gate error");
    } catch (const GateError& e) {
        CHECK(e.kind() == ErrorKind::Gate);
        CHECK_FALSE(e.report().gate_passed);
        CHECK(e.report().smallness.sum() > 1e-6);
    }
}
