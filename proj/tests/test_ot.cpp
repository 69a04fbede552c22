#include "otlin/error.hpp"
#include "otlin/transport.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace otlin;

namespace {

DiscreteMeasure cloud(std::mt19937_64& rng, int n, int dim, double spread = 1.0, bool uniform = true)
{
    std::uniform_real_distribution<double> u(-spread, spread), w(0.2, 1.0);
    DiscreteMeasure m;
    m.dim = dim;
    for (int i = 0; i < n; ++i) m.add({u(rng), dim == 2 ? u(rng) : 0.0}, uniform ? 1.0 / n : w(rng));
    if (!uniform) {
        const double s = m.mass();
        for (double& x : m.weights) x /= s;
    }
    return m;
}

/// Independent permutation oracle.
double permutation_min(const DiscreteMeasure& a, const DiscreteMeasure& b, const CostSpec& c)
{
    std::vector<int> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
        double s = 0;
        for (std::size_t i = 0; i < perm.size(); ++i) s += c.cost(a.points[i] - b.points[perm[i]]);
        best = std::min(best, s / a.size());
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// Quantile-function integral ∫_0^1 c(F^{-1}(t) − G^{-1}(t)) dt for sorted 1-d atoms.
double quantile_cost(DiscreteMeasure a, DiscreteMeasure b, const CostSpec& c)
{
    auto cdf = [](DiscreteMeasure m) {
        std::vector<std::pair<double, double>> v;
        for (std::size_t i = 0; i < m.size(); ++i) v.emplace_back(m.points[i].x, m.weights[i]);
        std::sort(v.begin(), v.end());
        return v;
    };
    auto va = cdf(a), vb = cdf(b);
    std::vector<double> cuts{0.0};
    double s = 0;
    for (auto& [x, w] : va) cuts.push_back(s += w);
    s = 0;
    for (auto& [x, w] : vb) cuts.push_back(s += w);
    std::sort(cuts.begin(), cuts.end());
    auto q = [](const std::vector<std::pair<double, double>>& v, double t) {
        double acc = 0;
        for (auto& [x, w] : v)
            if ((acc += w) > t) return x;
        return v.back().first;
    };
    double total = 0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double len = cuts[k + 1] - cuts[k];
        if (len <= 0) continue;
        const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
        total += len * c.cost({q(va, mid) - q(vb, mid), 0});
    }
    return total;
}

} // namespace

TEST_CASE("solve_exact examples")
{
    const auto c2 = CostSpec::radial(2, 2);
    std::mt19937_64 rng(1);
    const auto a = cloud(rng, 12, 2);
    const auto same = solve_exact(a, a, c2);
    CHECK(same.total_cost == 0.0);
    for (const auto& e : same.entries) CHECK(e.i == e.j);

    DiscreteMeasure l, m;
    l.dim = m.dim = 1;
    l.add({0, 0}, 0.5);
    l.add({1, 0}, 0.5);
    m.add({0.1, 0}, 0.5);
    m.add({1.1, 0}, 0.5);
    CHECK(solve_exact(l, m, c2).total_cost == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(brute_force(l, m, c2).total_cost == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(monotone_1d(l, m, c2).total_cost == doctest::Approx(0.005).epsilon(1e-12));

    DiscreteMeasure bad = m;
    bad.weights[0] = 0.9;
    CHECK_THROWS_AS(solve_exact(l, bad, c2), Error);
}

TEST_CASE("solve_exact equals the permutation oracle")
{
    std::mt19937_64 rng(2);
    for (int seed = 0; seed < 100; ++seed) {
        const double p = seed % 3 == 0 ? 1.5 : seed % 3 == 1 ? 2.0 : 3.0;
        const auto c = CostSpec::radial(p, p == 2 ? 2 : 5);
        const int n = 1 + seed % 6;
        const auto a = cloud(rng, n, 2), b = cloud(rng, n, 2);
        const double oracle = permutation_min(a, b, c);
        const auto plan = solve_exact(a, b, c);
        REQUIRE(std::abs(plan.total_cost - oracle) <= 1e-12 * std::max(1.0, oracle));
        REQUIRE(std::abs(brute_force(a, b, c).total_cost - oracle) <= 1e-12 * std::max(1.0, oracle));
        REQUIRE(plan.marginal_error() <= 1e-10);
    }
}

TEST_CASE("monotone_1d equals quantile formula and LP")
{
    std::mt19937_64 rng(4);
    for (int seed = 0; seed < 20; ++seed) {
        const double p = seed % 3 == 0 ? 1.5 : seed % 3 == 1 ? 2.0 : 3.0;
        const auto c = CostSpec::radial(p, 5);
        const auto a = cloud(rng, 50, 1, 2.0, false), b = cloud(rng, 50, 1, 2.0, false);
        const double q = quantile_cost(a, b, c);
        const auto mono = monotone_1d(a, b, c);
        const auto lp = solve_exact(a, b, c);
        CHECK(mono.total_cost == doctest::Approx(q).epsilon(1e-10));
        CHECK(std::abs(lp.total_cost - mono.total_cost) <= 1e-9);
        CHECK(mono.marginal_error() <= 1e-10);
    }
}

TEST_CASE("cyclical monotonicity")
{
    std::mt19937_64 rng(5);
    const auto c = CostSpec::radial(2, 2);
    const auto a = cloud(rng, 40, 2, 1.0, false), b = cloud(rng, 40, 2, 1.0, false);
    const auto plan = solve_exact(a, b, c);
    for (int N = 2; N <= 4; ++N) CHECK(check_cyclical_monotonicity(plan, c, N, 10000, 9).empty());

    DiscreteMeasure l, m;
    l.dim = m.dim = 1;
    for (int i = 0; i < 5; ++i) {
        l.add({double(i), 0}, 0.2);
        m.add({i + 0.3, 0}, 0.2);
    }
    auto mono = monotone_1d(l, m, c);
    CHECK(check_cyclical_monotonicity(mono, c, 2, 1000, 1).empty());
    std::swap(mono.entries[1].j, mono.entries[3].j);
    const auto v = check_cyclical_monotonicity(mono, c, 2, 1000, 1);
    REQUIRE_FALSE(v.empty());
    double worst = 0;
    for (const auto& x : v) worst = std::max(worst, x.excess);
    // crossed pair (1 → 3.3, 3 → 1.3): defect (3 − 1)(3.3 − 1.3) for c = |z|²/2
    CHECK(worst == doctest::Approx(4.0).epsilon(1e-12));

    TransportPlan single = solve_exact(restrict(l, Ball{{}, 0.5}), restrict(m, Ball{{}, 0.5}) , c);
    CHECK(check_cyclical_monotonicity(single, c, 3, 100, 1).empty());
}

TEST_CASE("W_c is symmetric")
{
    std::mt19937_64 rng(6);
    for (double p : {1.5, 3.0}) {
        const auto c = CostSpec::radial(p, 5);
        const auto a = cloud(rng, 30, 2, 1.0, false), b = cloud(rng, 25, 2, 1.5, false);
        CHECK(std::abs(transport_cost(a, b, c) - transport_cost(b, a, c)) <= 1e-10);
    }
}

TEST_CASE("energy_E")
{
    auto src = std::make_shared<DiscreteMeasure>();
    auto dst = std::make_shared<DiscreteMeasure>();
    src->add({0, 0}, 1);
    dst->add({1, 0}, 1);
    TransportPlan plan;
    plan.source = src;
    plan.target = dst;
    plan.entries.push_back({0, 0, 1.0});
    const auto c = CostSpec::radial(2, 2);
    CHECK(energy_E(plan, 4, c) == doctest::Approx(1.0 / (512 * std::numbers::pi)).epsilon(1e-14));
    CHECK(energy_E(plan, 4, c, Normalization::PlainVolume) == doctest::Approx(0.5 / (16 * std::numbers::pi)).epsilon(1e-14));

    std::mt19937_64 rng(8);
    const auto a = cloud(rng, 30, 2, 3.0), b = cloud(rng, 30, 2, 3.0);
    auto full = solve_exact(a, b, c);
    const double e = energy_E(full, 2.0, c);
    full.entries.pop_back();
    CHECK(energy_E(full, 2.0, c) <= e);
    CHECK(energy_E(solve_exact(a, a, c), 3.0, c) == 0.0);
}

TEST_CASE("data_D")
{
    const auto c = CostSpec::radial(2, 2);
    const auto q = lebesgue_quadrature(Ball{{}, 4}, 64, 2);
    CHECK(data_D(q, q, 4.0, c, 64).value <= 1e-3);

    const double delta = 0.2, R = 1.5;
    const auto l = lebesgue_quadrature(Ball{{}, R}, 12, 2);
    auto m = l;
    for (double& w : m.weights) w *= 1 + delta;
    const auto d = data_D(l, m, R, c, 12);
    CHECK(d.k_lambda <= 1e-12);
    CHECK(d.k_mu == doctest::Approx(std::pow(R, 2) * std::pow(delta, 2) / (1 + delta)).epsilon(1e-6));

    DiscreteMeasure point;
    point.dim = 1;
    point.add({0, 0}, 2.0);
    const auto half = data_half(point, 1.0, c, 400);
    // |B_1| = 2, κ = 1; W = ∫_{-1}^{1} x²/2 dx = 1/3, divided by |B_1|
    CHECK(half.kappa_mu == doctest::Approx(1.0));
    CHECK(half.w_mu == doctest::Approx(1.0 / 6.0).epsilon(1e-4));
    const auto unif = lebesgue_quadrature(Ball{{}, 1}, 400, 1);
    CHECK(half.w_mu == doctest::Approx(monotone_1d(point, unif, c).total_cost / 2.0).epsilon(1e-12));

    DiscreteMeasure empty;
    CHECK_THROWS_AS(data_D(empty, q, 1.0, c, 8), Error);
}
