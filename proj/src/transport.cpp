#include "otlin/transport.hpp"
#include "otlin/error.hpp"
#include "otlin/network_simplex.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace otlin {

const char* to_string(Normalization n) noexcept
{
    return n == Normalization::ScaleInvariant ? "scale_invariant" : "plain_volume";
}

double TransportPlan::mass() const
{
    double m = 0.0;
    for (const auto& e : entries) m += e.mass;
    return m;
}

double TransportPlan::marginal_error() const
{
    std::vector<double> row(source->size(), 0.0), col(target->size(), 0.0);
    for (const auto& e : entries) {
        row[e.i] += e.mass;
        col[e.j] += e.mass;
    }
    const double scale = std::max(source->mass(), std::numeric_limits<double>::min());
    double err = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) err = std::max(err, std::abs(row[i] - source->weights[i]) / scale);
    for (std::size_t j = 0; j < col.size(); ++j) err = std::max(err, std::abs(col[j] - target->weights[j]) / scale);
    return err;
}

namespace {

void check_pair(const DiscreteMeasure& a, const DiscreteMeasure& b)
{
    a.validate();
    b.validate();
    if (a.dim != b.dim) throw Error(ErrorKind::InvalidInput, "measures have different dimensions");
}

std::vector<std::size_t> positive_atoms(const DiscreteMeasure& mu)
{
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (mu.weights[i] > 0.0) idx.push_back(i);
    return idx;
}

/// Same atoms in the same order with weights equal up to rounding.
bool coincident(const DiscreteMeasure& a, const DiscreteMeasure& b)
{
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a.points[i] == b.points[i])) return false;
        if (std::abs(a.weights[i] - b.weights[i]) > 1e-12 * std::max(a.weights[i], b.weights[i])) return false;
    }
    return true;
}

} // namespace

TransportPlan solve_exact(const DiscreteMeasure& lambda, const DiscreteMeasure& mu, const CostSpec& cost)
{
    check_pair(lambda, mu);
    const double ml = lambda.mass();
    const double mm = mu.mass();
    if (std::abs(ml - mm) > 1e-9 * std::max(ml, mm))
        throw Error(ErrorKind::InvalidInput, fmt::format("mass mismatch: {:.17g} vs {:.17g}", ml, mm));

    auto target = std::make_shared<DiscreteMeasure>(mu);
    if (mm > 0.0 && ml != mm)
        for (double& w : target->weights) w *= ml / mm;

    TransportPlan plan;
    plan.source = std::make_shared<DiscreteMeasure>(lambda);
    plan.target = target;
    if (ml == 0.0) return plan;

    if (coincident(lambda, *target)) {
        // c ≥ 0 = c(0): the diagonal coupling is optimal with zero potentials
        target->weights = lambda.weights;
        for (std::size_t i = 0; i < lambda.size(); ++i)
            if (lambda.weights[i] > 0.0) plan.entries.push_back({i, i, lambda.weights[i]});
        return plan;
    }

    const auto rows = positive_atoms(lambda);
    const auto cols = positive_atoms(*target);
    if (rows.size() * cols.size() > kMaxDenseEntries)
        throw Error(ErrorKind::InvalidInput,
                    fmt::format("{}x{} cost matrix exceeds the dense cap of {}", rows.size(), cols.size(), kMaxDenseEntries));

    std::vector<double> supply, demand, C(rows.size() * cols.size());
    for (std::size_t i : rows) supply.push_back(lambda.weights[i]);
    for (std::size_t j : cols) demand.push_back(target->weights[j]);
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = 0; b < cols.size(); ++b)
            C[a * cols.size() + b] = cost.cost(lambda.points[rows[a]] - target->points[cols[b]]);

    const TransportSolution sol = solve_transportation(supply, demand, C);
    for (const auto& f : sol.flows) plan.entries.push_back({rows[f.i], cols[f.j], f.mass});
    plan.total_cost = sol.cost;
    plan.pivots = sol.pivots;
    plan.dual_certificate = std::max(sol.max_dual_violation, sol.max_slackness);
    const double scale = 1e-9 * std::max(1.0, *std::max_element(C.begin(), C.end()));
    if (plan.dual_certificate > scale)
        throw Error(ErrorKind::Numerical, fmt::format("optimality certificate violated by {:.3e}", plan.dual_certificate));
    return plan;
}

double transport_cost(const DiscreteMeasure& lambda, const DiscreteMeasure& mu, const CostSpec& cost)
{
    if (lambda.mass() == 0.0 && mu.mass() == 0.0) return 0.0;
    return solve_exact(lambda, mu, cost).total_cost;
}

double plan_cost(const TransportPlan& plan, const CostSpec& cost)
{
    double s = 0.0;
    for (const auto& e : plan.entries) s += e.mass * cost.cost(plan.x(e) - plan.y(e));
    return s;
}

TransportPlan brute_force(const DiscreteMeasure& lambda, const DiscreteMeasure& mu, const CostSpec& cost)
{
    check_pair(lambda, mu);
    const std::size_t n = lambda.size();
    if (n == 0 || n != mu.size() || n > 8) throw Error(ErrorKind::InvalidInput, "brute_force needs equal sizes 1..8");
    const double w = lambda.weights[0];
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(lambda.weights[i] - w) > 1e-12 * w || std::abs(mu.weights[i] - w) > 1e-12 * w)
            throw Error(ErrorKind::InvalidInput, "brute_force needs uniform equal weights");

    std::vector<std::size_t> perm(n), best;
    std::iota(perm.begin(), perm.end(), 0);
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) c += w * cost.cost(lambda.points[i] - mu.points[perm[i]]);
        if (c < best_cost) {
            best_cost = c;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    TransportPlan plan;
    plan.source = std::make_shared<DiscreteMeasure>(lambda);
    plan.target = std::make_shared<DiscreteMeasure>(mu);
    for (std::size_t i = 0; i < n; ++i) plan.entries.push_back({i, best[i], w});
    plan.total_cost = best_cost;
    return plan;
}

TransportPlan monotone_1d(const DiscreteMeasure& lambda, const DiscreteMeasure& mu, const CostSpec& cost)
{
    check_pair(lambda, mu);
    if (lambda.dim != 1) throw Error(ErrorKind::InvalidInput, "monotone_1d needs one-dimensional measures");
    const double ml = lambda.mass();
    const double mm = mu.mass();
    if (std::abs(ml - mm) > 1e-9 * std::max(ml, mm)) throw Error(ErrorKind::InvalidInput, "mass mismatch");

    auto target = std::make_shared<DiscreteMeasure>(mu);
    if (mm > 0.0 && ml != mm)
        for (double& w : target->weights) w *= ml / mm;

    auto order = [](const DiscreteMeasure& m) {
        std::vector<std::size_t> idx = positive_atoms(m);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return m.points[a].x < m.points[b].x; });
        return idx;
    };
    const auto src = order(lambda);
    const auto dst = order(*target);

    TransportPlan plan;
    plan.source = std::make_shared<DiscreteMeasure>(lambda);
    plan.target = target;
    std::size_t a = 0, b = 0;
    double ra = src.empty() ? 0.0 : lambda.weights[src[0]];
    double rb = dst.empty() ? 0.0 : target->weights[dst[0]];
    while (a < src.size() && b < dst.size()) {
        const double t = std::min(ra, rb);
        if (t > 0.0) plan.entries.push_back({src[a], dst[b], t});
        ra -= t;
        rb -= t;
        // Advance exhausted sides; the last atoms absorb rounding residue.
        bool moved = false;
        if (ra <= 1e-15 * ml && a + 1 < src.size()) {
            ra = lambda.weights[src[++a]];
            moved = true;
        }
        if (rb <= 1e-15 * ml && b + 1 < dst.size()) {
            rb = target->weights[dst[++b]];
            moved = true;
        }
        if (!moved) break;
    }
    plan.total_cost = plan_cost(plan, cost);
    return plan;
}

std::vector<CyclicViolation> check_cyclical_monotonicity(const TransportPlan& plan, const CostSpec& cost, int N,
                                                         std::uint64_t trials, std::uint64_t seed)
{
    if (N < 2 || N > 6) throw Error(ErrorKind::InvalidInput, "tuple size must be in [2, 6]");
    std::vector<CyclicViolation> out;
    const std::size_t E = plan.entries.size();
    if (E < static_cast<std::size_t>(N)) return out;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, E - 1);
    std::vector<std::size_t> tuple(static_cast<std::size_t>(N));
    for (std::uint64_t t = 0; t < trials; ++t) {
        for (int k = 0; k < N; ++k) {
            std::size_t c;
            do c = pick(rng);
            while (std::find(tuple.begin(), tuple.begin() + k, c) != tuple.begin() + k);
            tuple[static_cast<std::size_t>(k)] = c;
        }
        double diag = 0.0, shifted = 0.0;
        for (int k = 0; k < N; ++k) {
            const auto& e = plan.entries[tuple[static_cast<std::size_t>(k)]];
            const auto& f = plan.entries[tuple[static_cast<std::size_t>((k + 1) % N)]];
            diag += cost.cost(plan.x(e) - plan.y(e));
            shifted += cost.cost(plan.x(e) - plan.y(f));
        }
        if (diag - shifted > 1e-9 && out.size() < 1000) out.push_back({tuple, diag - shifted});
    }
    return out;
}

double energy_E(const TransportPlan& plan, double R, const CostSpec& cost, Normalization normalization)
{
    if (!(R > 0.0)) throw Error(ErrorKind::InvalidInput, "radius must be positive");
    const Ball B{{}, R};
    double s = 0.0;
    for (const auto& e : plan.entries)
        if (B.contains(plan.x(e)) || B.contains(plan.y(e))) s += e.mass * cost.cost(plan.x(e) - plan.y(e));
    double vol = ball_volume(plan.source->dim, R);
    if (normalization == Normalization::ScaleInvariant) vol *= std::pow(R, cost.p());
    return s / vol;
}

LocalUniformPlan local_uniform_plan(const DiscreteMeasure& mu, double R, const CostSpec& cost, int resolution,
                                    DataMetric metric)
{
    LocalUniformPlan out;
    const Ball B{{}, R};
    out.index = restrict_indices(mu, B);
    out.local.dim = mu.dim;
    for (std::size_t i : out.index) out.local.add(mu.points[i], mu.weights[i]);
    out.kappa = out.local.mass() / ball_volume(mu.dim, R);
    if (!(out.kappa > 0.0)) throw Error(ErrorKind::InvalidInput, fmt::format("no local mass in B_{}", R));
    out.uniform = lebesgue_quadrature(B, resolution, mu.dim);
    for (double& w : out.uniform.weights) w *= out.kappa;
    if (metric == DataMetric::Wc) {
        out.plan = solve_exact(out.local, out.uniform, cost);
        out.cost = out.plan.total_cost;
    } else {
        const CostSpec pth = CostSpec::radial(cost.p(), std::max(cost.lambda_cap(), cost.p()));
        out.plan = solve_exact(out.local, out.uniform, pth);
        out.cost = cost.p() * out.plan.total_cost;
    }
    return out;
}

DataTerm data_half(const DiscreteMeasure& mu, double R, const CostSpec& cost, int resolution, DataMetric metric)
{
    DataTerm d;
    const LocalUniformPlan lp = local_uniform_plan(mu, R, cost, resolution, metric);
    const double p = cost.p();
    d.w_mu = lp.cost / ball_volume(mu.dim, R);
    d.kappa_mu = lp.kappa;
    d.k_mu = std::pow(R, p) * std::pow(lp.kappa, 1.0 - p) * std::pow(std::abs(lp.kappa - 1.0), p);
    d.value = d.w_mu + d.k_mu;
    return d;
}

DataTerm data_D(const DiscreteMeasure& lambda, const DiscreteMeasure& mu, double R, const CostSpec& cost,
                int resolution, DataMetric metric)
{
    const DataTerm a = data_half(lambda, R, cost, resolution, metric);
    const DataTerm b = data_half(mu, R, cost, resolution, metric);
    DataTerm d;
    d.w_lambda = a.w_mu;
    d.kappa_lambda = a.kappa_mu;
    d.k_lambda = a.k_mu;
    d.w_mu = b.w_mu;
    d.kappa_mu = b.kappa_mu;
    d.k_mu = b.k_mu;
    d.value = a.value + b.value;
    return d;
}

SmallnessReport smallness_report(const TransportPlan& plan, const std::vector<double>& radii, const CostSpec& cost,
                                 int resolution, Normalization normalization)
{
    SmallnessReport rep;
    rep.normalization = normalization;
    for (double R : radii) {
        rep.E_values[R] = energy_E(plan, R, cost, normalization);
        rep.D_values[R] = data_D(*plan.source, *plan.target, R, cost, resolution).value;
    }
    return rep;
}

} // namespace otlin
