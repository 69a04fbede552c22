/// Seeded instance batteries for the inequality checks.
#include "otlin/battery.hpp"

#include "otlin/harness.hpp"
#include "otlin/inequalities.hpp"

#include <json.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

namespace otlin {

namespace {

struct Row {
    std::vector<double> values;
    bool pass = true;
};

struct Spec {
    std::vector<std::string> columns;
    std::vector<std::string> ratio_columns;
    std::function<Row(std::uint64_t)> run;
    bool min_spread_per_p = false;
};

double pick(std::initializer_list<double> v, std::uint64_t i) { return v.begin()[i % v.size()]; }

/// Radial cost with its certified ellipticity constant.
CostSpec radial_cost(double p) { return CostSpec::radial(p, p == 2.0 ? 2.0 : (p == 3.0 ? 5.0 : 4.0)); }

std::mt19937_64 rng_for(std::uint64_t seed, std::uint64_t salt)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(salt)};
    return std::mt19937_64(seq);
}

DiscreteMeasure random_cloud(std::mt19937_64& rng, int n)
{
    std::uniform_real_distribution<double> pos(-2.0, 2.0), w(0.5, 1.5);
    DiscreteMeasure m;
    for (int i = 0; i < n; ++i) {
        const double x = pos(rng), y = pos(rng);
        m.add({x, y}, w(rng));
    }
    const double s = 1.0 / m.mass();
    for (double& v : m.weights) v *= s;
    return m;
}

Vec2 random_wave(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
    const double t = ang(rng);
    return {0.5 * std::cos(t), 0.5 * std::sin(t)};
}

// -- triangle and adding a common measure --------------------------------------------------------

Row triangle_row(std::uint64_t seed)
{
    auto rng = rng_for(seed, 1);
    const double p = pick({1.5, 2.0, 3.0}, seed);
    const double eps = pick({0.1, 0.5}, seed / 3);
    const CostSpec cost = radial_cost(p);
    std::uniform_int_distribution<int> n(3, 7);
    const auto m1 = random_cloud(rng, n(rng));
    const auto m2 = random_cloud(rng, n(rng));
    const auto m3 = random_cloud(rng, n(rng));
    const auto t = triangle_check(m1, m2, m3, eps, cost);
    const auto a = add_constant_check(m1, m2, cost);
    return {{p, eps, t.w13, t.w12, t.w23, t.lhs, t.rhs, t.C_used, t.rhs > 0 ? t.lhs / t.rhs : 0.0, a.numerator,
             a.denominator, a.ratio, a.bound},
            t.pass && a.pass};
}

// -- radial projection -----------------------------------------------------------------------------

Row projection_row(std::uint64_t seed)
{
    auto rng = rng_for(seed, 2);
    const double p = pick({1.5, 2.0, 3.0}, seed);
    const double R = 2.5;
    const double r0 = (1.0 - kAnnulusEpsilon) * R, r1 = (1.0 + kAnnulusEpsilon) * R;
    std::uniform_real_distribution<double> rr(r0 * r0, r1 * r1), w(0.5, 1.5);
    // every other seed puts the mass on a half circle
    const double arc = seed % 2 ? 2.0 * std::numbers::pi : std::numbers::pi;
    std::uniform_real_distribution<double> th(0.0, arc);
    DiscreteMeasure g;
    for (int i = 0; i < 400; ++i) {
        const double r = std::sqrt(rr(rng)), t = th(rng);
        g.add({r * std::cos(t), r * std::sin(t)}, w(rng));
    }
    const auto pr = projection_lemma_check(g, R, 64, p);
    return {{p, R, pr.lower_ratio, pr.upper_ratio, pr.left, pr.middle, pr.right}, pr.pass};
}

// -- L∞ displacement ----------------------------------------------------------------------------

Row linfty_row(std::uint64_t seed)
{
    auto rng = rng_for(seed, 3);
    const double p = pick({2.0, 3.0}, seed);
    const double a = pick({0.2, 0.1, 0.05}, seed / 2);
    const CostSpec cost = radial_cost(p);
    InstanceFamily f;
    f.scale = a;
    f.wave = random_wave(rng);
    const auto [lam, mu] = generate(f, seed);
    const auto plan = solve_exact(lam, mu, cost);
    const auto s = compute_smallness(plan, cost, LinearizationConfig{}.data_resolution);
    const auto d = linfty_displacement(plan, cost, s.sum());
    return {{p, a, s.E4_plain, s.D4, d.sup_disp, d.bound_check}, std::isfinite(d.bound_check)};
}

// -- Hölder test functions against the uniform measure --------------------------------------------

Row c2measures_row(std::uint64_t seed)
{
    auto rng = rng_for(seed, 4);
    const double p = pick({1.5, 2.0, 3.0}, seed);
    const CostSpec cost = radial_cost(p);
    const double s = 0.25;
    auto mu = lattice_measure(2.5, s, 2);
    std::uniform_real_distribution<double> j(-0.5 * s, 0.5 * s), w(0.5, 1.5);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        mu.points[i].x += j(rng);
        mu.points[i].y += j(rng);
        mu.weights[i] *= w(rng);
    }
    const Vec2 k = random_wave(rng) * 2.0;
    const Vec2 x0{j(rng), j(rng)};
    std::function<double(Vec2)> xi;
    double alpha = 1.0;
    switch ((seed / 3) % 4) {
    case 0: xi = [](Vec2 x) { return x.x; }; break;
    case 1: xi = [k](Vec2 x) { return std::sin(dot(k, x)); }; break;
    case 2:
        alpha = 0.5;
        xi = [x0](Vec2 x) { return std::sqrt((x - x0).norm()); };
        break;
    default:
        alpha = 0.5;
        xi = [](Vec2 x) { return std::sqrt(std::abs(x.x)); };
        break;
    }
    const double R = 2.0;
    const auto r = c2measures_check(xi, alpha, mu, R, cost, 16);
    const double denom = r.K * r.rhs;
    return {{p, alpha, R, r.lhs, r.rhs, r.K, denom > 0 ? r.lhs / denom : 0.0}, r.pass};
}

// -- localisation ------------------------------------------------------------------------------------

Row localisation_row(std::uint64_t seed)
{
    auto rng = rng_for(seed, 5);
    const double a = pick({0.3, 0.2, 0.1}, seed);
    const double p = pick({1.5, 2.0, 3.0}, seed / 3);
    const double R = 2.05 + 0.1 * static_cast<double>(seed % 10);
    const CostSpec cost = radial_cost(p);
    InstanceFamily f;
    f.scale = a;
    f.spacing = 0.25;
    f.wave = random_wave(rng);
    const auto [lam, mu] = generate(f, seed);
    const auto plan = solve_exact(lam, mu, cost);
    const auto s = compute_smallness(plan, cost, 16);
    const auto r = localisation_check(plan, R, cost, suite::kLocalisationDelta, suite::kLocalisationTau,
                                      s.E4_total + s.D4_total);
    return {{p, R, r.lhs, r.w_local, r.smallness, r.rhs, r.rhs > 0 ? r.lhs / r.rhs : 0.0}, r.pass};
}

// -- data restriction -------------------------------------------------------------------------------

Row data_restriction_row(std::uint64_t seed)
{
    auto rng = rng_for(seed, 6);
    const double p = pick({1.5, 2.0, 3.0}, seed);
    const CostSpec cost = radial_cost(p);
    InstanceFamily f;
    f.spacing = 0.25;
    f.wave = random_wave(rng);
    switch ((seed / 3) % 3) {
    case 0:
        f.kind = FamilyKind::SmoothSine;
        f.mode = SineMode::Density;
        f.scale = std::uniform_real_distribution<double>(0.1, 0.3)(rng);
        break;
    case 1:
        f.kind = FamilyKind::AtomicCloud;
        f.scale = std::uniform_real_distribution<double>(0.3, 1.0)(rng);
        break;
    default:
        f.kind = FamilyKind::AnnulusNoise;
        f.scale = std::uniform_real_distribution<double>(0.2, 0.5)(rng);
        break;
    }
    const auto mu = generate(f, seed).second;
    const auto r = data_restriction_check(mu, cost, {2.0, 2.25, 2.5, 2.75, 3.0}, 16);
    return {{p, f.scale, r.integral_estimate, r.D4, r.ratio}, r.degenerate || r.ratio <= suite::kDataRestriction};
}

// -- regularity of the Neumann problem ---------------------------------------------------------------

BoundaryData fourier_data(std::mt19937_64& rng, double R, int n_theta)
{
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    auto g = BoundaryData::zeros(2, R, n_theta);
    const double w = g.bin_width();
    const double c0 = 0.5 * c(rng);
    for (int k = 0; k < n_theta; ++k) g.mass[k] = c0 * R * w;
    for (int m = 1; m <= 3; ++m) {
        const double a = c(rng) / m, b = c(rng) / m;
        for (int k = 0; k < n_theta; ++k) {
            const double t0 = k * w, t1 = (k + 1) * w;
            // exact bin integrals of a cos(mθ) + b sin(mθ)
            g.mass[k] += R * (a * (std::sin(m * t1) - std::sin(m * t0)) - b * (std::cos(m * t1) - std::cos(m * t0))) / m;
        }
    }
    return g;
}

Row regularity_row(std::uint64_t seed)
{
    auto rng = rng_for(seed, 7);
    const double p = pick({1.5, 2.0, 3.0}, seed);
    const CostSpec cost = radial_cost(p);
    const double R = 1.5;
    auto mesh = std::make_shared<const DiskMesh>(build_mesh(R, 0.1));
    const auto g = fourier_data(rng, R, 512);
    const auto prob = make_neumann_problem(mesh, cost, g);
    const auto sol = solve_neumann(prob);
    std::vector<std::pair<double, ScalarField>> ladder;
    for (double r : {0.4, 0.2, 0.1}) ladder.emplace_back(r, solve_neumann(make_neumann_problem(mesh, cost, mollify_boundary(g, r))).phi);
    const auto d = regularity_diagnostics(prob, sol.phi, ladder);
    const auto h = holder_product_check(sol.phi, cost, R - 0.5);
    const double K = suite::kRegularity;
    const bool ok = d.energy_ratio <= K && d.interior_ratio <= K && d.diff_ratio <= K &&
                    (h.degenerate || h.ratio <= cost.p_conj() * (1.0 + 1e-9));
    return {{p, d.energy_ratio, d.alt_energy_ratio, d.interior_ratio, d.diff_ratio, d.fitted_s, h.lhs, h.rhs, h.ratio},
            ok};
}

// -- quasi-orthogonality ledger ---------------------------------------------------------------------

Row orthogonality_row(std::uint64_t seed)
{
    auto rng = rng_for(seed, 8);
    const double a = pick({0.3, 0.2, 0.1}, seed);
    const double p = pick({1.5, 2.0, 3.0}, seed / 3);
    const CostSpec cost = radial_cost(p);
    InstanceFamily f;
    f.scale = a;
    f.spacing = 0.3;
    f.wave = random_wave(rng);
    const auto [lam, mu] = generate(f, seed);
    LinearizationConfig cfg;
    cfg.gate = 5.0;
    cfg.solve_raw = false;
    const auto rep = run_linearization(lam, mu, cost, 0.1, cfg);
    const auto& L = rep.ledger;
    // for p = 2, Λ = 2 the Bregman term is V/2 exactly
    const double p2 = p == 2.0 ? std::abs(L.rhs - L.time_slack - 0.5 * L.lhs_V) : 0.0;
    return {{p, a, L.lhs_V, L.term_a, L.term_b, L.term_c, L.rhs, L.convexity_constant, L.identity_defect, p2},
            L.pass && p2 <= suite::kIdentityTolerance};
}

const std::map<std::string, Spec>& specs()
{
    static const std::map<std::string, Spec> s{
        {"triangle",
         {{"p", "eps", "w13", "w12", "w23", "lhs", "rhs", "C", "ratio", "ac_numerator", "ac_denominator", "ac_ratio",
           "ac_bound"},
          {"ratio", "ac_ratio"},
          triangle_row}},
        {"projection",
         {{"p", "R", "lower_ratio", "upper_ratio", "left", "middle", "right"}, {"lower_ratio", "upper_ratio"},
          projection_row}},
        {"linfty", {{"p", "scale", "E4", "D4", "sup_disp", "bound_check"}, {"bound_check"}, linfty_row, true}},
        {"c2measures", {{"p", "alpha", "R", "lhs", "rhs", "K", "ratio"}, {"ratio"}, c2measures_row}},
        {"localisation", {{"p", "R", "lhs", "w_local", "smallness", "rhs", "ratio"}, {"ratio"}, localisation_row}},
        {"data-restriction", {{"p", "scale", "integral", "D4", "ratio"}, {"ratio"}, data_restriction_row}},
        {"regularity",
         {{"p", "energy_ratio", "alt_energy_ratio", "interior_ratio", "diff_ratio", "fitted_s", "holder_lhs",
           "holder_rhs", "holder_ratio"},
          {"energy_ratio", "interior_ratio", "diff_ratio", "holder_ratio"},
          regularity_row}},
        {"orthogonality",
         {{"p", "scale", "lhs_V", "term_a", "term_b", "term_c", "rhs", "convexity_constant", "identity_defect",
           "p2_identity_defect"},
          {},
          orthogonality_row}},
    };
    return s;
}

std::vector<double> finite(const std::vector<double>& v)
{
    std::vector<double> out;
    for (double x : v)
        if (std::isfinite(x)) out.push_back(x);
    return out;
}

} // namespace

const std::vector<std::string>& lemma_names()
{
    static const std::vector<std::string> names{"triangle",     "projection",       "linfty",     "c2measures",
                                                "localisation", "data-restriction", "regularity", "orthogonality"};
    return names;
}

bool is_lemma_name(const std::string& name)
{
    const auto& n = lemma_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

std::size_t LemmaBattery::column(const std::string& name) const
{
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw Error(ErrorKind::InvalidInput, "no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

double spread_over_median(const std::vector<double>& values)
{
    auto v = finite(values);
    if (v.empty()) return 1.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const double med = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    if (med <= 0.0) return v.back() > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    return v.back() / med;
}

double spread_over_min(const std::vector<double>& values)
{
    std::vector<double> v;
    for (double x : finite(values))
        if (x > 0.0) v.push_back(x);
    if (v.empty()) return 1.0;
    return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
}

LemmaBattery run_lemma_battery(const std::string& lemma, int count, std::uint64_t first_seed, unsigned workers)
{
    if (!is_lemma_name(lemma)) throw Error(ErrorKind::Usage, "unknown lemma '" + lemma + "'");
    if (count <= 0) throw Error(ErrorKind::InvalidInput, "battery needs at least one seed");
    const Spec& spec = specs().at(lemma);

    LemmaBattery b;
    b.lemma = lemma;
    b.columns = spec.columns;
    b.ratio_columns = spec.ratio_columns;
    std::vector<Row> rows(static_cast<std::size_t>(count));
    std::vector<std::exception_ptr> errors(rows.size());

    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(count));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < rows.size();) {
            try {
                rows[i] = spec.run(first_seed + i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (std::size_t i = 0; i < rows.size(); ++i) {
        b.seeds.push_back(first_seed + i);
        b.rows.push_back(std::move(rows[i].values));
        b.row_pass.push_back(rows[i].pass);
        b.pass = b.pass && rows[i].pass;
    }
    for (const auto& name : b.ratio_columns) {
        const std::size_t c = b.column(name);
        double s = 1.0;
        if (spec.min_spread_per_p) {
            std::map<double, std::vector<double>> by_p;
            for (const auto& r : b.rows) by_p[r[0]].push_back(r[c]);
            for (const auto& [p, v] : by_p) s = std::max(s, spread_over_min(v));
        } else {
            std::vector<double> v;
            for (const auto& r : b.rows) v.push_back(r[c]);
            s = spread_over_median(v);
        }
        b.spread.push_back(s);
        b.pass = b.pass && s <= suite::kSpreadLimit;
    }
    return b;
}

void write_battery_csv(std::ostream& os, const LemmaBattery& b)
{
    os << "seed";
    for (const auto& c : b.columns) os << ',' << c;
    os << ",pass\n";
    for (std::size_t i = 0; i < b.rows.size(); ++i) {
        os << b.seeds[i];
        for (double v : b.rows[i]) os << ',' << fmt::format("{:.17g}", v);
        os << ',' << (b.row_pass[i] ? 1 : 0) << '\n';
    }
}

std::string battery_json(const LemmaBattery& b, const std::string& config_hash)
{
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "lemma-battery";
    j["config_hash"] = config_hash;
    j["lemma"] = b.lemma;
    j["checks"] = {b.lemma};
    j["columns"] = b.columns;
    j["seeds"] = b.seeds;
    j["ratio_columns"] = b.ratio_columns;
    nlohmann::ordered_json spread = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < b.ratio_columns.size(); ++k)
        spread[b.ratio_columns[k]] = std::isfinite(b.spread[k]) ? nlohmann::ordered_json(b.spread[k]) : nullptr;
    j["spread"] = spread;
    j["spread_limit"] = suite::kSpreadLimit;
    j["failed_rows"] = std::count(b.row_pass.begin(), b.row_pass.end(), false);
    j["pass"] = b.pass;
    return j.dump(2) + "\n";
}

} // namespace otlin
