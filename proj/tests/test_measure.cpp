#include "otlin/error.hpp"
#include "otlin/measure.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace otlin;

namespace {
constexpr double kPi = std::numbers::pi;

DiscreteMeasure ring(double radius, int n, int dim = 2, double phase = 0.0)
{
    DiscreteMeasure m;
    m.dim = dim;
    for (int i = 0; i < n; ++i) {
        const double a = phase + 2 * kPi * (i + 0.5) / n;
        m.add({radius * std::cos(a), radius * std::sin(a)}, 1.0 / n);
    }
    return m;
}
} // namespace

TEST_CASE("restrict")
{
    DiscreteMeasure m;
    m.add({0, 0}, 1);
    m.add({5, 0}, 1);
    m.add({1, 0}, 1);
    const auto r = restrict(m, Ball{{}, 1});
    REQUIRE(r.size() == 1);
    CHECK(r.points[0] == Vec2{0, 0});
    CHECK(restrict(DiscreteMeasure{}, Ball{{}, 1}).empty());
    CHECK(restrict(r, Ball{{}, 1}).size() == r.size());
    CHECK(restrict(m, Ball{{}, 2}).mass() <= m.mass());
}

TEST_CASE("kappa")
{
    const auto q = lebesgue_quadrature(Ball{{}, 1}, 20, 2);
    DiscreteMeasure m = q;
    for (double& w : m.weights) w *= 2.0 / kPi;
    CHECK(kappa(m, Ball{{}, 1.0 + 1e-9}) == doctest::Approx(2.0 / kPi).epsilon(1e-6));
    CHECK(kappa(DiscreteMeasure{}, Ball{{}, 1}) == 0.0);
    const auto big = lebesgue_quadrature(Ball{{}, 4}, 200, 2);
    CHECK(std::abs(kappa(big, Ball{{}, 2}) - 1.0) <= 1e-3);
}

TEST_CASE("lebesgue_quadrature mass and moments")
{
    for (int res : {2, 7, 33}) CHECK(lebesgue_quadrature(Ball{{}, 1}, res, 2).mass() == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(lebesgue_quadrature(Ball{{}, 4}, 16, 1).mass() == doctest::Approx(8.0).epsilon(1e-14));
    double prev = 1.0;
    for (int res : {8, 16, 32}) {
        const auto q = lebesgue_quadrature(Ball{{}, 1}, res, 2);
        double m2 = 0;
        for (std::size_t i = 0; i < q.size(); ++i) m2 += q.weights[i] * q.points[i].norm2();
        const double err = std::abs(m2 - kPi / 2);
        CHECK(err <= 2.0 / (res * res));
        CHECK(err < prev);
        prev = err;
    }
    CHECK_THROWS_AS(lebesgue_quadrature(Ball{{}, 1}, 1, 2), Error);
}

TEST_CASE("radial_project")
{
    DiscreteMeasure d;
    d.add({0.5, 0}, 1);
    const auto b = radial_project(d, 2, 16);
    CHECK(b.mass[0] == 1.0);
    CHECK(b.total() == 1.0);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3, 3);
    DiscreteMeasure cloud;
    for (int i = 0; i < 200; ++i) cloud.add({u(rng), u(rng)}, 0.01 * (1 + i % 7));
    const int n = 24;
    const auto base = radial_project(cloud, 2, n);
    CHECK(base.total() == doctest::Approx(cloud.mass()).epsilon(1e-14));
    const double w = 2 * kPi / n;
    DiscreteMeasure rot = cloud;
    for (auto& p : rot.points) p = {p.x * std::cos(w) - p.y * std::sin(w), p.x * std::sin(w) + p.y * std::cos(w)};
    const auto shifted = radial_project(rot, 2, n);
    int mismatches = 0;
    for (int k = 0; k < n; ++k) mismatches += std::abs(shifted.mass[(k + 1) % n] - base.mass[k]) > 1e-12;
    CHECK(mismatches <= 2);

    std::uniform_real_distribution<double> ang(0, 2 * kPi);
    DiscreteMeasure unif;
    const int atoms = 20000;
    for (int i = 0; i < atoms; ++i) {
        const double a = ang(rng);
        unif.add({1.9 * std::cos(a), 1.9 * std::sin(a)}, 1.0 / atoms);
    }
    const auto ub = radial_project(unif, 2, 10);
    for (double m : ub.mass) CHECK(std::abs(m - 0.1) <= 5.0 / std::sqrt(double(atoms)) * 0.3);

    DiscreteMeasure origin;
    origin.add({0, 0}, 1);
    CHECK_THROWS_AS(radial_project(origin, 1, 8), Error);
}

TEST_CASE("radial_project in one dimension")
{
    DiscreteMeasure m;
    m.dim = 1;
    m.add({-0.3, 0}, 0.25);
    m.add({0.7, 0}, 0.5);
    const auto b = radial_project(m, 2, 0);
    REQUIRE(b.bins() == 2);
    CHECK(b.mass[0] == 0.25);
    CHECK(b.mass[1] == 0.5);
    CHECK(b.bin_point(0).x == -2.0);
}

TEST_CASE("mollify_boundary")
{
    auto flat = BoundaryData::zeros(2, 2, 32);
    for (double& m : flat.mass) m = 0.3;
    const auto fm = mollify_boundary(flat, 4 * flat.bin_width());
    for (int k = 0; k < 32; ++k) CHECK(std::abs(fm.mass[k] - 0.3) <= 1e-12);

    auto spike = BoundaryData::zeros(2, 1, 40);
    spike.mass[10] = 1.0;
    const auto sm = mollify_boundary(spike, 3 * spike.bin_width());
    int support = 0;
    for (int k = 0; k < 40; ++k) support += sm.mass[k] > 0;
    CHECK(support <= 7);
    for (int j = 1; j <= 3; ++j) CHECK(sm.mass[10 + j] == doctest::Approx(sm.mass[10 - j]).epsilon(1e-14));
    CHECK(sm.sup_density() <= spike.sup_density());

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 100; ++t) {
        auto b = BoundaryData::zeros(2, 2.5, 50);
        for (double& m : b.mass) m = u(rng);
        const auto out = mollify_boundary(b, (1 + t % 5) * b.bin_width());
        CHECK(std::abs(out.total() - b.total()) <= 1e-12 * b.total());
        for (double m : out.mass) CHECK(m >= 0.0);
    }
    CHECK_THROWS_AS(mollify_boundary(spike, 0.5 * spike.bin_width()), Error);
}

TEST_CASE("mollify_boundary is linear")
{
    auto a = BoundaryData::zeros(2, 1, 30), b = a, s = a;
    for (int k = 0; k < 30; ++k) {
        a.mass[k] = std::sin(k) + 1.5;
        b.mass[k] = (k % 4) * 0.2;
        s.mass[k] = 2 * a.mass[k] + 3 * b.mass[k];
    }
    const double r = 2.5 * a.bin_width();
    const auto ma = mollify_boundary(a, r), mb = mollify_boundary(b, r), ms = mollify_boundary(s, r);
    for (int k = 0; k < 30; ++k) CHECK(ms.mass[k] == doctest::Approx(2 * ma.mass[k] + 3 * mb.mass[k]).epsilon(1e-13));
}

TEST_CASE("projection_lemma_check")
{
    const auto exact = projection_lemma_check(ring(2.0, 64), 2.0, 64, 2.0);
    CHECK(exact.pass);
    CHECK(exact.lower_ratio == doctest::Approx(1.0).epsilon(1e-12));

    DiscreteMeasure spike;
    spike.add({2.0 * 1.05, 0}, 1.0);
    const auto s = projection_lemma_check(spike, 2.0, 32, 3.0);
    CHECK(s.left > 0);
    CHECK(s.middle > 0);
    CHECK(s.right > 0);
    CHECK(s.pass);

    const auto z = projection_lemma_check(DiscreteMeasure{}, 2.0, 32, 2.0);
    CHECK(z.degenerate);
    CHECK(z.pass);

    DiscreteMeasure outside;
    outside.add({3, 0}, 1);
    CHECK_THROWS_AS(projection_lemma_check(outside, 2.0, 32, 2.0), Error);
}

TEST_CASE("measure CSV round trip")
{
    const auto m = ring(1.3, 9);
    std::stringstream ss;
    write_measure_csv(ss, m);
    const auto back = read_measure_csv(ss);
    REQUIRE(back.size() == m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(back.points[i] == m.points[i]);
        CHECK(back.weights[i] == m.weights[i]);
    }
}
