#include "otlin/error.hpp"
#include "otlin/trajectory.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace otlin;

namespace {

TransportPlan single(Vec2 x, Vec2 y, double m = 1.0)
{
    auto s = std::make_shared<DiscreteMeasure>();
    auto t = std::make_shared<DiscreteMeasure>();
    s->add(x, m);
    t->add(y, m);
    TransportPlan plan;
    plan.source = s;
    plan.target = t;
    plan.entries.push_back({0, 0, m});
    return plan;
}

DiscreteMeasure cloud(std::mt19937_64& rng, int n, double spread)
{
    std::uniform_real_distribution<double> u(-spread, spread);
    DiscreteMeasure m;
    for (int i = 0; i < n; ++i) m.add({u(rng), u(rng)}, 1.0 / n);
    return m;
}

} // namespace

TEST_CASE("crossing_times examples")
{
    const auto a = crossing_times({{3, 0}, {0, 0}, 1}, 2);
    REQUIRE(a);
    CHECK(a->sigma == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(a->tau == 1.0);
    const auto b = crossing_times({{0.5, 0.1}, {-0.3, 1.0}, 1}, 2);
    REQUIRE(b);
    CHECK(b->sigma == 0.0);
    CHECK(b->tau == 1.0);
    CHECK_FALSE(crossing_times({{3, 0}, {3, 1}, 1}, 2));
    CHECK_THROWS_AS(crossing_times({{3, 0}, {3, 1}, 1}, 0), Error);
}

TEST_CASE("crossing_times invariants")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-4, 4);
    for (int t = 0; t < 2000; ++t) {
        const Trajectory tr{{u(rng), u(rng)}, {u(rng), u(rng)}, 1};
        const double R = 2.0;
        const auto ct = crossing_times(tr, R);
        if (!ct) continue;
        REQUIRE(ct->sigma <= ct->tau);
        if (ct->sigma > 0) CHECK(std::abs(tr.at(ct->sigma).norm() - R) <= 1e-10);
        if (ct->tau < 1) CHECK(std::abs(tr.at(ct->tau).norm() - R) <= 1e-10);
        const double s = 3.7;
        const auto sc = crossing_times({tr.x * s, tr.y * s, 1}, R * s);
        REQUIRE(sc);
        CHECK(std::abs(sc->sigma - ct->sigma) <= 1e-12);
        CHECK(std::abs(sc->tau - ct->tau) <= 1e-12);
    }
}

TEST_CASE("entry and exit measures")
{
    const auto plan = single({3, 0}, {0, 0});
    const auto atoms = boundary_atoms(plan, 2);
    REQUIRE(atoms.f.size() == 1);
    CHECK((atoms.f.points[0] - Vec2{2, 0}).norm() < 1e-15);
    CHECK(atoms.g.empty());
    const auto [f, g] = entry_exit_measures(plan, 2, 16);
    CHECK(f.mass[0] == 1.0);
    CHECK(g.total() == 0.0);

    const auto inside = entry_exit_measures(single({0.1, 0}, {-0.5, 0.2}), 2, 16);
    CHECK(inside.first.total() == 0.0);
    CHECK(inside.second.total() == 0.0);
}

TEST_CASE("flux balance and time reversal")
{
    std::mt19937_64 rng(2);
    const auto c = CostSpec::radial(2, 2);
    const auto a = cloud(rng, 120, 3.5), b = cloud(rng, 120, 3.5);
    const auto plan = solve_exact(a, b, c);
    const auto rev = solve_exact(b, a, c);
    for (double R : {1.0, 2.0, 2.5, 3.0}) {
        const auto atoms = boundary_atoms(plan, R);
        const double lhs = atoms.f.mass() - atoms.g.mass();
        const double rhs = restrict(b, Ball{{}, R}).mass() - restrict(a, Ball{{}, R}).mass();
        CHECK(std::abs(lhs - rhs) <= 1e-10);
        for (const auto& pt : atoms.f.points) CHECK(std::abs(pt.norm() - R) <= 1e-10);
        for (const auto& pt : atoms.g.points) CHECK(std::abs(pt.norm() - R) <= 1e-10);
        const auto back = boundary_atoms(rev, R);
        CHECK(back.f.mass() == doctest::Approx(atoms.g.mass()).epsilon(1e-12));
        CHECK(back.g.mass() == doctest::Approx(atoms.f.mass()).epsilon(1e-12));
    }
}

TEST_CASE("approximate boundary data")
{
    const auto c = CostSpec::radial(2, 2);
    // no crossing trajectories
    const auto q = lebesgue_quadrature(Ball{{}, 4}, 16, 2);
    const auto id = solve_exact(q, q, c);
    const BoundaryApproximator approx(id, c, 16);
    const auto ab = approx.at(2.5, 64, 4 * 2 * std::numbers::pi / 64);
    CHECK(ab.f_bar.total() == 0.0);
    CHECK(ab.g_bar.total() == 0.0);

    // μ already uniform: π̄ is the identity, so ḡ is the mollified projection of y itself
    const int n_theta = 64;
    const double r = 4 * 2 * std::numbers::pi / n_theta;
    auto shifted = std::make_shared<DiscreteMeasure>(q);
    for (auto& p : shifted->points) p = p + Vec2{0.05, 0.0};
    const auto plan = solve_exact(*shifted, q, c);
    const BoundaryApproximator a2(plan, c, 16);
    const auto out = a2.at(2.5, n_theta, r);
    DiscreteMeasure ends;
    const Ball B{{}, 2.5};
    for (const auto& e : plan.entries)
        if (crossing_times({plan.x(e), plan.y(e), e.mass}, 2.5) && !B.contains(plan.y(e))) ends.add(plan.y(e), e.mass);
    const auto expect = mollify_boundary(radial_project(ends, 2.5, n_theta), r);
    for (int k = 0; k < n_theta; ++k) CHECK(out.g_bar.mass[k] == doctest::Approx(expect.mass[k]).epsilon(1e-9));
    CHECK(out.density_ok);
}

TEST_CASE("radius selection")
{
    const auto c = CostSpec::radial(2, 2);
    const auto q = lebesgue_quadrature(Ball{{}, 4}, 12, 2);
    const auto plan = solve_exact(q, q, c);
    const BoundaryApproximator approx(plan, c, 12);
    const auto cands = default_radius_candidates();
    REQUIRE(cands.size() == 11);
    CHECK(cands.front() == doctest::Approx(2.05));
    CHECK(cands.back() == doctest::Approx(2.95));
    const auto sel = select_radius(plan, approx, c, cands, 32, 4 * 2 * std::numbers::pi / 32, 12);
    double avg = 0;
    for (const auto& s : sel.scores) avg += s.score / sel.scores.size();
    for (const auto& s : sel.scores) CHECK(s.crossing_cost == 0.0);
    auto best = std::min_element(sel.scores.begin(), sel.scores.end(),
                                 [](const RadiusScore& a, const RadiusScore& b) { return a.score < b.score; });
    CHECK(sel.R_star == best->R);
    CHECK(best->score <= avg);
    CHECK_THROWS_AS(select_radius(plan, approx, c, {2.1, 2.2}, 32, 0.5, 12), Error);

    // a single long trajectory crossing only radii below 2.45
    auto crossing = single({0.2, 0}, {2.4, 0}, 1e-3);
    CHECK(crossing_cost(crossing, c, 2.3) > 0.0);
    CHECK(crossing_cost(crossing, c, 2.6) == 0.0);
}

TEST_CASE("linfty displacement")
{
    const auto c = CostSpec::radial(2, 2);
    const auto q = lebesgue_quadrature(Ball{{}, 4}, 10, 2);
    const auto id = solve_exact(q, q, c);
    CHECK(linfty_displacement(id, c, 0.0).sup_disp == 0.0);
    const auto d = linfty_displacement(single({1, 0}, {1.5, 0}), c, 0.0625);
    CHECK(d.exponent == doctest::Approx(0.25));
    CHECK(d.sup_disp == doctest::Approx(0.5));
    CHECK(d.bound_check == doctest::Approx(1.0));
}

TEST_CASE("path_integral")
{
    const Trajectory a{{0, 0}, {1, 0}, 1};
    CHECK(path_integral(a, [](Vec2) { return 1.0; }, 0.2, 0.7) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(path_integral(a, [](Vec2 z) { return z.x; }, 0, 1) == doctest::Approx(0.5).epsilon(1e-14));
    const Trajectory b{{1, 0}, {-1, 0}, 1};
    CHECK(path_integral(b, [](Vec2 z) { return z.norm2(); }, 0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(path_integral(a, [](Vec2 z) { return std::pow(z.x, 15); }, 0, 1, 8) == doctest::Approx(1.0 / 16).epsilon(1e-13));
    CHECK_THROWS_AS(path_integral(a, [](Vec2) { return 1.0; }, -0.1, 0.5), Error);
    double wsum = 0;
    for (auto [t, w] : gauss_legendre(5)) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-15));
}
