#include "otlin/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>

namespace otlin {

double LinearizationConfig::mollify_radius() const
{
    return mollify_bins * 2.0 * std::numbers::pi / n_theta;
}

IntervalSolution IntervalSolution::solve(const BoundaryData& net, const CostSpec& cost)
{
    if (net.dim != 1 || net.bins() != 2) throw Error(ErrorKind::InvalidInput, "interval problem needs two boundary bins");
    IntervalSolution s;
    s.R = net.radius;
    s.cost = cost;
    const double g_minus = net.mass[0], g_plus = net.mass[1];
    s.c_R = -(g_plus + g_minus) / (2.0 * s.R);
    s.intercept = 0.5 * (g_plus - g_minus);
    return s;
}

Vec2 IntervalSolution::gradient(Vec2 x) const
{
    return cost.grad({flux(x.x), 0.0});
}

namespace {

/// Piece of a path with constant (or sampled) gradient: weight in t and the value of Dφ.
struct PathPiece {
    double weight;
    Vec2 grad;
    bool clamped;
};

/// Dφ of a P1 field, with straight segments split at every mesh edge they cross.
class MeshGradient {
public:
    explicit MeshGradient(const ScalarField& phi) : m_(*phi.mesh)
    {
        grads_.resize(m_.triangles.size());
        for (std::size_t t = 0; t < grads_.size(); ++t) grads_[t] = phi.triangle_gradient(static_cast<int>(t));
        // unique undirected edges
        for (const auto& tri : m_.triangles)
            for (int k = 0; k < 3; ++k) {
                int a = tri[k], b = tri[(k + 1) % 3];
                if (a > b) std::swap(a, b);
                edges_.push_back({a, b});
            }
        std::sort(edges_.begin(), edges_.end());
        edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
        cell_ = std::max(m_.h, m_.R / 64.0);
        n_ = static_cast<int>(std::ceil(2.0 * m_.R / cell_)) + 1;
        buckets_.assign(static_cast<std::size_t>(n_ * n_), {});
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            const Vec2 p = m_.nodes[static_cast<std::size_t>(edges_[e][0])], q = m_.nodes[static_cast<std::size_t>(edges_[e][1])];
            const auto [i0, j0] = cell(Vec2{std::min(p.x, q.x), std::min(p.y, q.y)});
            const auto [i1, j1] = cell(Vec2{std::max(p.x, q.x), std::max(p.y, q.y)});
            for (int i = i0; i <= i1; ++i)
                for (int j = j0; j <= j1; ++j) buckets_[static_cast<std::size_t>(i * n_ + j)].push_back(e);
        }
        stamp_.assign(edges_.size(), 0);
    }

    Vec2 at(Vec2 x, bool* clamped) const
    {
        const MeshLocation loc = m_.locate(x, true);
        if (clamped) *clamped = loc.clamped;
        return grads_[static_cast<std::size_t>(loc.triangle)];
    }

    std::vector<PathPiece> pieces(Vec2 a, Vec2 b, double t0, double t1) const
    {
        const Vec2 d = b - a;
        std::vector<double> ts{t0, t1};
        if (d.norm() > 0.0 && t1 > t0) {
            const Vec2 p = a + d * t0, q = a + d * t1;
            const auto [i0, j0] = cell(Vec2{std::min(p.x, q.x), std::min(p.y, q.y)});
            const auto [i1, j1] = cell(Vec2{std::max(p.x, q.x), std::max(p.y, q.y)});
            ++tick_;
            for (int i = i0; i <= i1; ++i)
                for (int j = j0; j <= j1; ++j)
                    for (std::size_t e : buckets_[static_cast<std::size_t>(i * n_ + j)]) {
                        if (stamp_[e] == tick_) continue;
                        stamp_[e] = tick_;
                        const Vec2 e0 = m_.nodes[static_cast<std::size_t>(edges_[e][0])];
                        const Vec2 ev = m_.nodes[static_cast<std::size_t>(edges_[e][1])] - e0;
                        const double den = cross(d, ev);
                        if (std::abs(den) <= 1e-300) continue;
                        const double t = cross(e0 - a, ev) / den;
                        const double s = cross(e0 - a, d) / den;
                        if (s >= 0.0 && s <= 1.0 && t > t0 && t < t1) ts.push_back(t);
                    }
        }
        std::sort(ts.begin(), ts.end());
        std::vector<PathPiece> out;
        if (!(t1 > t0)) return out;
        for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
            const double w = ts[k + 1] - ts[k];
            if (w <= 0.0) continue;
            bool cl = false;
            const Vec2 g = at(a + d * (0.5 * (ts[k] + ts[k + 1])), &cl);
            out.push_back({w, g, cl});
        }
        return out;
    }

    template <class H>
    double ball_integral(H h) const
    {
        double s = 0.0;
        for (std::size_t t = 0; t < grads_.size(); ++t) s += m_.areas[t] * h(grads_[t]);
        return s;
    }

    template <class H>
    double sup_over(double radius, H h) const
    {
        double s = 0.0;
        for (std::size_t t = 0; t < grads_.size(); ++t)
            if (m_.centroid(static_cast<int>(t)).norm() < radius) s = std::max(s, h(grads_[t]));
        return s;
    }

private:
    std::pair<int, int> cell(Vec2 x) const
    {
        auto idx = [&](double v) { return std::clamp(static_cast<int>(std::floor((v + m_.R) / cell_)), 0, n_ - 1); };
        return {idx(x.x), idx(x.y)};
    }

    const DiskMesh& m_;
    std::vector<Vec2> grads_;
    std::vector<std::array<int, 2>> edges_;
    double cell_ = 1.0;
    int n_ = 1;
    std::vector<std::vector<std::size_t>> buckets_;
    mutable std::vector<unsigned> stamp_;
    mutable unsigned tick_ = 0;
};

/// Closed-form gradient on an interval, integrated with composite Gauss–Legendre rules.
class IntervalGradient {
public:
    explicit IntervalGradient(const IntervalSolution& s) : s_(s), gl_(gauss_legendre(8)) {}

    Vec2 at(Vec2 x, bool* clamped) const
    {
        if (clamped) *clamped = std::abs(x.x) > s_.R;
        return s_.gradient({std::clamp(x.x, -s_.R, s_.R), 0.0});
    }

    std::vector<PathPiece> pieces(Vec2 a, Vec2 b, double t0, double t1) const
    {
        std::vector<PathPiece> out;
        if (!(t1 > t0)) return out;
        constexpr int kSub = 16;
        const double len = (t1 - t0) / kSub;
        for (int k = 0; k < kSub; ++k)
            for (auto [u, w] : gl_) {
                const double t = t0 + len * (k + u);
                bool cl = false;
                const Vec2 g = at(a + (b - a) * t, &cl);
                out.push_back({w * len, g, cl});
            }
        return out;
    }

    template <class H>
    double ball_integral(H h) const
    {
        constexpr int kSub = 256;
        const double len = 2.0 * s_.R / kSub;
        double s = 0.0;
        for (int k = 0; k < kSub; ++k)
            for (auto [u, w] : gl_) s += w * len * h(s_.gradient({-s_.R + len * (k + u), 0.0}));
        return s;
    }

    template <class H>
    double sup_over(double radius, H h) const
    {
        // |∇c(F)| is monotone in |F| and F is affine, so the sup sits at an end point
        const double r = std::min(radius, s_.R);
        return std::max(h(s_.gradient({-r, 0.0})), h(s_.gradient({r, 0.0})));
    }

private:
    const IntervalSolution& s_;
    std::vector<std::pair<double, double>> gl_;
};

template <class G>
QuasiOrthogonalityLedger ledger_impl(const TransportPlan& plan, const G& field, double R, const CostSpec& cost)
{
    QuasiOrthogonalityLedger L;
    L.convexity_constant = 1.0 / cost.lambda_cap();
    const double p = cost.p();
    double omega_cost = 0.0, b_sum = 0.0, cF_path = 0.0;
    for (const auto& e : plan.entries) {
        const Trajectory tr{plan.x(e), plan.y(e), e.mass};
        const auto ct = crossing_times(tr, R);
        if (!ct) continue;
        ++L.entries;
        L.omega_mass += e.mass;
        const Vec2 v = tr.velocity();
        const double cv = cost.cost(v);
        omega_cost += e.mass * cv;
        L.time_slack += e.mass * (1.0 - (ct->tau - ct->sigma)) * cv;
        for (const PathPiece& pc : field.pieces(tr.x, tr.y, ct->sigma, ct->tau)) {
            ++L.pieces;
            if (pc.clamped) ++L.clamped_pieces;
            const Vec2 F = cost.dual_grad(pc.grad);
            const double mw = e.mass * pc.weight;
            const double cF = cost.cost(F);
            const double pair = dot(v - F, pc.grad);
            L.lhs_V += mw * v_p(p, v, F);
            b_sum += mw * pair;
            cF_path += mw * cF;
            L.bregman += mw * (cv - cF - pair);
        }
    }
    const double cF_ball = field.ball_integral([&](Vec2 g) { return cost.cost(cost.dual_grad(g)); });
    L.term_a = omega_cost - cF_ball;
    L.term_b = -b_sum;
    L.term_c = cF_ball - cF_path;
    L.rhs = L.term_a + L.term_b + L.term_c;
    L.identity_defect = std::abs(L.rhs - L.time_slack - L.bregman);
    L.pass = L.convexity_constant * L.lhs_V <= L.rhs + 1e-8;
    return L;
}

template <class G>
void fill_main(LinearizationReport& rep, const TransportPlan& plan, const G& field, const G* raw, const CostSpec& cost,
               const LinearizationConfig& cfg)
{
    const Ball B1{{}, 1.0};
    for (const auto& e : plan.entries) {
        const Vec2 x = plan.x(e), y = plan.y(e);
        if (!B1.contains(x) && !B1.contains(y)) continue;
        ++rep.main_entries;
        bool cl = false;
        const Vec2 v = y - x;
        rep.lhs_main += e.mass * cost.cost(v - cost.dual_grad(field.at(x, &cl)));
        if (cl) ++rep.main_clamped;
        if (raw) rep.lhs_main_raw += e.mass * cost.cost(v - cost.dual_grad(raw->at(x, nullptr)));
        if (cfg.time_resolved)
            for (const PathPiece& pc : field.pieces(x, y, 0.0, 1.0))
                rep.lhs_main_time += e.mass * pc.weight * cost.cost(v - cost.dual_grad(pc.grad));
    }
    const double pc = cost.p_conj();
    auto gp = [pc](Vec2 g) { return std::pow(g.norm(), pc); };
    rep.sup_gradient = field.sup_over(1.0, gp);
    rep.energy_gradient = field.ball_integral(gp);
}

void finish_report(LinearizationReport& rep, const CostSpec& cost)
{
    const double s = rep.smallness.sum();
    rep.gradient_ratio = s > 0.0 ? (rep.sup_gradient + rep.energy_gradient) / s : 0.0;
    const double p = cost.p();
    rep.vc_applicable = p >= 2.0;
    if (rep.vc_applicable) {
        const double lv = rep.ledger.lhs_V;
        const double denom = lv + std::pow(lv, 2.0 / p) * std::pow(rep.smallness.E4_total, 1.0 - 2.0 / p);
        rep.vc_ratio = denom > 0.0 ? rep.lhs_main / denom : 0.0;
    }
}

double half_value(const LocalUniformPlan& lp, double R, double p, int dim)
{
    return lp.cost / ball_volume(dim, R) + std::pow(R, p) * std::pow(lp.kappa, 1.0 - p) * std::pow(std::abs(lp.kappa - 1.0), p);
}

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const GateError&) {
        throw;
    } catch (const Error& e) {
        if (!e.stage().empty()) throw;
        throw Error(e.kind(), e.what(), stage);
    } catch (const std::exception& e) {
        throw Error(ErrorKind::Numerical, e.what(), stage);
    }
}

} // namespace

QuasiOrthogonalityLedger quasi_orthogonality_ledger(const TransportPlan& plan, const ScalarField& phi, double R,
                                                    const CostSpec& cost)
{
    if (!phi.mesh) throw Error(ErrorKind::InvalidInput, "field without a mesh");
    return ledger_impl(plan, MeshGradient(phi), R, cost);
}

QuasiOrthogonalityLedger quasi_orthogonality_ledger(const TransportPlan& plan, const IntervalSolution& phi, double R,
                                                    const CostSpec& cost)
{
    return ledger_impl(plan, IntervalGradient(phi), R, cost);
}

Smallness compute_smallness(const TransportPlan& plan, const CostSpec& cost, int resolution)
{
    Smallness s;
    const int dim = plan.source->dim;
    s.E4 = energy_E(plan, 4.0, cost, Normalization::ScaleInvariant);
    s.E4_plain = energy_E(plan, 4.0, cost, Normalization::PlainVolume);
    s.E4_total = s.E4_plain * ball_volume(dim, 4.0);
    s.D4 = data_D(*plan.source, *plan.target, 4.0, cost, resolution).value;
    s.D4_total = s.D4 * ball_volume(dim, 4.0);
    return s;
}

TermEstimates term_estimates(const QuasiOrthogonalityLedger& ledger, double tau_tolerance, const Smallness& smallness,
                             double constant)
{
    TermEstimates t;
    t.energy_gap = ledger.term_a;
    t.pairing = -ledger.term_b;
    t.fubini_gap = ledger.term_c;
    t.tau = tau_tolerance;
    t.constant = constant;
    t.budget = tau_tolerance * smallness.E4_total + constant * smallness.D4_total;
    const double slack = 1e-12 * (1.0 + smallness.E4_total);
    t.pass_energy = t.energy_gap <= t.budget + slack;
    t.pass_pairing = std::abs(t.pairing) <= t.budget + slack;
    t.pass_fubini = t.fubini_gap <= t.budget + slack;
    t.pass = t.pass_energy && t.pass_pairing && t.pass_fubini;
    return t;
}

TermEstimates term_estimates(const TransportPlan& plan, const ScalarField& phi_r, double R, const CostSpec& cost,
                             double tau_tolerance, const Smallness& smallness, double constant)
{
    return term_estimates(quasi_orthogonality_ledger(plan, phi_r, R, cost), tau_tolerance, smallness, constant);
}

LinearizationReport run_linearization(const DiscreteMeasure& lambda, const DiscreteMeasure& mu, const CostSpec& cost,
                                      double tau_tolerance, const LinearizationConfig& config)
{
    staged("input", [&] {
        lambda.validate();
        mu.validate();
        if (lambda.dim != mu.dim) throw Error(ErrorKind::InvalidInput, "measures of different dimension");
        return 0;
    });
    const TransportPlan plan = staged("transport", [&] { return solve_exact(lambda, mu, cost); });
    return run_linearization(plan, cost, tau_tolerance, config);
}

LinearizationReport run_linearization(const TransportPlan& plan, const CostSpec& cost, double tau_tolerance,
                                      const LinearizationConfig& config)
{
    if (!cost.admissible()) throw Error(ErrorKind::InvalidInput, "cost exponent must exceed 1", "input");
    LinearizationReport rep;
    const int dim = plan.source->dim;
    const double p = cost.p();
    rep.dim = dim;
    rep.cost = cost.describe();
    rep.tau_tolerance = tau_tolerance;
    rep.gate = config.gate;
    rep.mollify_radius = dim == 2 ? config.mollify_radius() : 0.0;

    // auxiliary plans to the uniform measure on B_4, shared by D(4) and the boundary data
    auto sides = staged("smallness", [&] {
        auto a = local_uniform_plan(*plan.source, 4.0, cost, config.data_resolution);
        auto b = local_uniform_plan(*plan.target, 4.0, cost, config.data_resolution);
        rep.smallness.E4 = energy_E(plan, 4.0, cost, Normalization::ScaleInvariant);
        rep.smallness.E4_plain = energy_E(plan, 4.0, cost, Normalization::PlainVolume);
        rep.smallness.E4_total = rep.smallness.E4_plain * ball_volume(dim, 4.0);
        rep.smallness.D4 = half_value(a, 4.0, p, dim) + half_value(b, 4.0, p, dim);
        rep.smallness.D4_total = rep.smallness.D4 * ball_volume(dim, 4.0);
        return std::make_pair(std::move(a), std::move(b));
    });
    rep.displacement = linfty_displacement(plan, cost, rep.smallness.sum());
    if (!(rep.smallness.sum() <= config.gate)) {
        rep.gate_passed = false;
        throw GateError(fmt::format("E(4) + D(4) = {:.6g} exceeds the gate {:.6g}", rep.smallness.sum(), config.gate), rep);
    }

    const BoundaryApproximator approx(plan, std::move(sides.first), std::move(sides.second));
    const double r = rep.mollify_radius;
    const RadiusSelection sel = staged("radius", [&] {
        return select_radius(plan, approx, cost, config.radius_candidates, config.n_theta, r, config.data_resolution);
    });
    rep.R_selected = sel.R_star;
    rep.radius_scores = sel.scores;
    const ApproxBoundary ab = staged("boundary", [&] { return approx.at(rep.R_selected, config.n_theta, r); });
    rep.boundary_density_ratio = std::max(ab.density_ratio_f, ab.density_ratio_g);
    rep.boundary_density_ok = ab.density_ok;

    if (dim == 1) {
        const IntervalSolution sol = IntervalSolution::solve(ab.g_bar - ab.f_bar, cost);
        const IntervalSolution raw = IntervalSolution::solve(ab.g_raw - ab.f_raw, cost);
        rep.c_R = sol.c_R;
        const IntervalGradient field(sol), field_raw(raw);
        rep.ledger = staged("ledger", [&] { return ledger_impl(plan, field, rep.R_selected, cost); });
        fill_main(rep, plan, field, &field_raw, cost, config);
    } else {
        auto mesh = staged("mesh", [&] {
            return std::make_shared<const DiskMesh>(build_mesh(rep.R_selected, config.mesh_h, config.mesh_grading));
        });
        rep.mesh_nodes = mesh->nodes.size();
        const NeumannSolution sol = staged("pde", [&] {
            const NeumannProblem prob = make_neumann_problem(mesh, cost, ab.g_bar - ab.f_bar);
            rep.c_R = prob.c_R;
            return solve_neumann(prob, config.solver_tol, config.max_iter);
        });
        rep.solve_info = sol.info;
        std::optional<NeumannSolution> raw;
        if (config.solve_raw) {
            raw = staged("pde-raw", [&] {
                return solve_neumann(make_neumann_problem(mesh, cost, ab.g_raw - ab.f_raw), config.solver_tol, config.max_iter);
            });
            rep.solve_info_raw = raw->info;
        }
        const MeshGradient field(sol.phi);
        std::optional<MeshGradient> field_raw;
        if (raw) field_raw.emplace(raw->phi);
        rep.ledger = staged("ledger", [&] { return ledger_impl(plan, field, rep.R_selected, cost); });
        fill_main(rep, plan, field, field_raw ? &*field_raw : nullptr, cost, config);
    }
    rep.terms = term_estimates(rep.ledger, tau_tolerance, rep.smallness, config.term_constant);
    finish_report(rep, cost);
    return rep;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < std::min(x.size(), y.size()); ++k)
        if (x[k] > 0.0 && y[k] > 0.0) pts.emplace_back(std::log(x[k]), std::log(y[k]));
    if (pts.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0.0, my = 0.0;
    for (auto [a, b] : pts) {
        mx += a;
        my += b;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxy = 0.0, sxx = 0.0;
    for (auto [a, b] : pts) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

ScalingStudy scaling_study(const InstanceGenerator& family, const std::vector<double>& scales, const CostSpec& cost,
                           double tau_tolerance, const LinearizationConfig& config)
{
    const SeededGenerator seeded = [&](double a, std::uint64_t) { return family(a); };
    return scaling_study(seeded, scales, {0}, cost, tau_tolerance, config);
}

ScalingStudy scaling_study(const SeededGenerator& family, const std::vector<double>& scales,
                           const std::vector<std::uint64_t>& seeds, const CostSpec& cost, double tau_tolerance,
                           const LinearizationConfig& config)
{
    if (scales.size() < 3) throw Error(ErrorKind::InvalidInput, "scaling study needs at least 3 scales");
    if (seeds.empty()) throw Error(ErrorKind::InvalidInput, "scaling study needs at least one seed");
    std::vector<std::future<ScalingRow>> jobs;
    for (double s : scales)
        for (std::uint64_t seed : seeds)
            jobs.push_back(std::async(std::launch::async, [&, s, seed] {
                ScalingRow row;
                row.scale = s;
                row.seed = seed;
                try {
                    const auto [lam, mu] = family(s, seed);
                    const LinearizationReport rep = run_linearization(lam, mu, cost, tau_tolerance, config);
                    row.E4 = rep.smallness.E4_plain;
                    row.D4 = rep.smallness.D4;
                    row.lhs_main = rep.lhs_main;
                    row.sup_disp = rep.displacement.sup_disp;
                    row.R_selected = rep.R_selected;
                    row.gradient_ratio = rep.gradient_ratio;
                } catch (const GateError& e) {
                    row.E4 = e.report().smallness.E4_plain;
                    row.D4 = e.report().smallness.D4;
                    row.error = e.what();
                } catch (const std::exception& e) {
                    row.error = e.what();
                }
                return row;
            }));
    ScalingStudy st;
    for (auto& j : jobs) st.rows.push_back(j.get());
    std::vector<double> xs, ys;
    for (const auto& r : st.rows)
        if (r.error.empty()) {
            xs.push_back(r.E4);
            ys.push_back(r.lhs_main);
        }
    st.slope = loglog_slope(xs, ys);
    st.degenerate = !std::isfinite(st.slope);
    if (st.degenerate) st.slope = 0.0;
    return st;
}

void write_study_csv(std::ostream& os, const ScalingStudy& study)
{
    os << "scale,seed,E4,D4,lhs_main,sup_disp,R_selected,gradient_ratio\n";
    for (const auto& r : study.rows)
        os << fmt::format("{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.scale, r.seed, r.E4, r.D4,
                          r.lhs_main, r.sup_disp, r.R_selected, r.gradient_ratio);
}

void write_study_dat(std::ostream& os, const ScalingStudy& study)
{
    os << "# log(E4) log(lhs_main)\n";
    for (const auto& r : study.rows)
        if (r.error.empty() && r.E4 > 0.0 && r.lhs_main > 0.0)
            os << fmt::format("{:.17g} {:.17g}\n", std::log(r.E4), std::log(r.lhs_main));
}

} // namespace otlin
