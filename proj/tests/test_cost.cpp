#include "otlin/cost.hpp"
#include "otlin/error.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace otlin;

namespace {

/// sup_x ⟨ξ,x⟩ − c(x) along the ray of ξ by golden-section search (radial costs only).
double ray_sup(const CostSpec& c, Vec2 xi)
{
    const double n = xi.norm();
    if (n == 0.0) return 0.0;
    const Vec2 e = xi / n;
    auto f = [&](double s) { return s * n - c.cost(e * s); };
    double a = 0.0, b = 1e3;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int i = 0; i < 400; ++i) {
        const double m1 = b - g * (b - a), m2 = a + g * (b - a);
        if (f(m1) < f(m2)) a = m1; else b = m2;
    }
    return f(0.5 * (a + b));
}

} // namespace

TEST_CASE("cost_eval examples")
{
    CHECK(CostSpec::radial(2, 2).cost({3, 4}) == doctest::Approx(12.5).epsilon(1e-15));
    CHECK(CostSpec::radial(3, 5).cost({0, 2}) == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
    CHECK(CostSpec::radial(1.5, 4).cost({0, 0}) == 0.0);
    CHECK(CostSpec::anisotropic(3, {1, 0, 4}, 64).cost({0, 0}) == 0.0);
    CHECK_THROWS_AS(CostSpec::radial(2, 2).cost({std::nan(""), 0}), Error);
}

TEST_CASE("cost_grad examples")
{
    auto close = [](Vec2 a, Vec2 b) { return (a - b).norm() < 1e-14 * (1 + b.norm()); };
    CHECK(close(CostSpec::radial(2, 2).grad({3, 4}), {3, 4}));
    CHECK(close(CostSpec::radial(3, 5).grad({0, 2}), {0, 4}));
    CHECK(close(CostSpec::radial(1.5, 4).grad({1, 0}), {1, 0}));
    CHECK(CostSpec::radial(1.5, 4).grad({0, 0}) == Vec2{0, 0});
}

TEST_CASE("dual_eval and dual_grad examples")
{
    CHECK(CostSpec::radial(2, 2).dual({2, 0}) == doctest::Approx(2.0));
    const auto c3 = CostSpec::radial(3, 5);
    CHECK(c3.dual({8, 0}) == doctest::Approx(15.0849).epsilon(1e-5));
    CHECK(c3.dual({8, 0}) == doctest::Approx(ray_sup(c3, {8, 0})).epsilon(1e-9));
    CHECK(c3.dual({0, 0}) == 0.0);
    CHECK((c3.dual_grad({8, 0}) - Vec2{std::sqrt(8.0), 0}).norm() < 1e-14);
    CHECK((CostSpec::radial(1.5, 4).dual_grad({4, 0}) - Vec2{16, 0}).norm() < 1e-12);
    CHECK((CostSpec::radial(2, 2).dual_grad({2, 0}) - Vec2{2, 0}).norm() < 1e-15);
}

TEST_CASE("anisotropic dual agrees with a brute-force supremum")
{
    const auto c = CostSpec::anisotropic(3, {1, 0, 4}, 64);
    for (Vec2 xi : {Vec2{1, 0}, Vec2{0, 2}, Vec2{-1.5, 0.7}}) {
        double best = -1e300;
        for (int i = -400; i <= 400; ++i)
            for (int j = -400; j <= 400; ++j) {
                const Vec2 x{i * 0.005, j * 0.005};
                best = std::max(best, dot(xi, x) - c.cost(x));
            }
        CHECK(c.dual(xi) >= best - 1e-12);
        CHECK(c.dual(xi) - best < 1e-3);
    }
}

TEST_CASE("V_p and U_p examples")
{
    CHECK(v_p(2, {1, 0}, {0, 1}) == doctest::Approx(2.0));
    CHECK(v_p(3.3, {5, 1}, {5, 1}) == 0.0);
    CHECK(v_p(4, {1, 0}, {0, 0}) == doctest::Approx(1.0));
    CHECK(v_p(1.5, {0, 0}, {0, 0}) == 0.0);
    CHECK(u_p(2, {1, 0}, {0, 0}) == doctest::Approx(1.0));
    CHECK(u_p(3, {2, 0}, {0, 0}) == doctest::Approx(8.0));
    CHECK(u_p(1.7, {0.3, -2}, {0.3, -2}) == 0.0);
    CHECK(v_p(3, {1, 2}, {-3, 0.5}) == doctest::Approx(v_p(3, {-3, 0.5}, {1, 2})));
}

TEST_CASE("round trip, Fenchel-Young and finite differences")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> logr(-3, 3), ang(0, 2 * M_PI);
    for (const auto& c : {CostSpec::radial(1.5, 4), CostSpec::radial(2, 2), CostSpec::radial(3, 5),
                          CostSpec::anisotropic(3, {1, 0, 4}, 64)}) {
        for (int s = 0; s < 10000; ++s) {
            const double r = std::pow(10.0, logr(rng)), a = ang(rng);
            const Vec2 xi{r * std::cos(a), r * std::sin(a)};
            const Vec2 z = c.dual_grad(xi);
            REQUIRE((c.grad(z) - xi).norm() <= 1e-8 * (1 + r));
            const double gap = c.cost(z) + c.dual(xi) - dot(xi, z);
            REQUIRE(std::abs(gap) <= 1e-8 * (1 + std::pow(z.norm(), c.p())));
            const Vec2 w{std::cos(3 * a), std::sin(5 * a)};
            REQUIRE(c.cost(w) + c.dual(xi) - dot(xi, w) >= -1e-10 * (1 + c.dual(xi) + c.cost(w)));
        }
        for (Vec2 z : {Vec2{0.7, -0.2}, Vec2{2, 1}, Vec2{-0.1, 0.4}}) {
            const double h = 1e-6;
            const Vec2 g = c.grad(z);
            const Vec2 fd{(c.cost(z + Vec2{h, 0}) - c.cost(z - Vec2{h, 0})) / (2 * h),
                          (c.cost(z + Vec2{0, h}) - c.cost(z - Vec2{0, h})) / (2 * h)};
            CHECK((g - fd).norm() <= 1e-6 * g.norm());
            const Vec2 gd = c.dual_grad(z);
            const Vec2 fdd{(c.dual(z + Vec2{h, 0}) - c.dual(z - Vec2{h, 0})) / (2 * h),
                           (c.dual(z + Vec2{0, h}) - c.dual(z - Vec2{0, h})) / (2 * h)};
            CHECK((gd - fdd).norm() <= 1e-5 * gd.norm());
        }
    }
}

TEST_CASE("verify_assumptions examples")
{
    CHECK(verify_assumptions(CostSpec::radial(2, 2), 10000, 1).pass);
    CHECK(verify_assumptions(CostSpec::anisotropic(3, {1, 0, 4}, 64), 10000, 1).pass);
    CHECK(verify_assumptions(CostSpec::radial(1.5, 4), 10000, 1).pass);
    CHECK(verify_assumptions(CostSpec::radial(3, 5), 10000, 1).pass);
    const auto bad = verify_assumptions(CostSpec::unchecked_radial(1, 2), 10000, 1);
    CHECK_FALSE(bad.pass);
    REQUIRE(bad.find("strong_p_convexity") != nullptr);
    CHECK_FALSE(bad.find("strong_p_convexity")->pass);
    CHECK_THROWS_AS(CostSpec::radial(1, 2), Error);
}

TEST_CASE("dual growth constant is stable under more samples")
{
    const auto c = CostSpec::radial(3, 5);
    const auto a = verify_assumptions(c, 2000, 3);
    const auto b = verify_assumptions(c, 20000, 3);
    const double ka = a.find("c_growth_dual")->worst_constant;
    const double kb = b.find("c_growth_dual")->worst_constant;
    CHECK(kb <= 2 * ka);
    CHECK(ka <= 2 * kb);
}
