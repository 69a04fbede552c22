/// Instance generators, INI configuration, cache keys and JSON report emission.
#include "otlin/harness.hpp"
#include "otlin/inequalities.hpp"

#include <json.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace otlin {

using nlohmann::ordered_json;

const char* to_string(FamilyKind kind) noexcept
{
    switch (kind) {
    case FamilyKind::SmoothSine: return "smooth-sine";
    case FamilyKind::AtomicCloud: return "atomic-cloud";
    case FamilyKind::AnnulusNoise: return "annulus-noise";
    case FamilyKind::Identity: return "identity";
    }
    return "?";
}

const char* to_string(SineMode mode) noexcept { return mode == SineMode::Flow ? "flow" : "density"; }

FamilyKind parse_family_kind(const std::string& s)
{
    for (auto k : {FamilyKind::SmoothSine, FamilyKind::AtomicCloud, FamilyKind::AnnulusNoise, FamilyKind::Identity})
        if (s == to_string(k)) return k;
    throw Error(ErrorKind::Usage, "unknown instance family '" + s + "'");
}

SineMode parse_sine_mode(const std::string& s)
{
    if (s == "flow") return SineMode::Flow;
    if (s == "density") return SineMode::Density;
    throw Error(ErrorKind::Usage, "unknown sine mode '" + s + "'");
}

DiscreteMeasure lattice_measure(double R, double spacing, int dim)
{
    if (!(spacing > 0.0) || !(R > 0.0)) throw Error(ErrorKind::InvalidInput, "lattice needs positive radius and spacing");
    DiscreteMeasure m;
    m.dim = dim;
    const int n = static_cast<int>(R / spacing) + 2;
    for (int i = -n; i <= n; ++i) {
        if (dim == 1) {
            const Vec2 x{(i + 0.5) * spacing, 0.0};
            if (std::abs(x.x) < R) m.add(x, spacing);
            continue;
        }
        for (int j = -n; j <= n; ++j) {
            const Vec2 x{(i + 0.5) * spacing, (j + 0.5) * spacing};
            if (x.norm() < R) m.add(x, spacing * spacing);
        }
    }
    return m;
}

namespace {

void equalize(const DiscreteMeasure& lambda, DiscreteMeasure& mu)
{
    const double s = lambda.mass() / mu.mass();
    for (double& w : mu.weights) w *= s;
}

Vec2 sine_flow(Vec2 x, double a, Vec2 k, int dim)
{
    if (dim == 1) return {x.x + a, 0.0};
    const double kn = k.norm();
    const Vec2 kp{-k.y, k.x};
    const double u = dot(k, x), v = dot(kp, x);
    // ∇[sin(u) cosh(v)/|k|]
    return x + (k * (std::cos(u) * std::cosh(v)) + kp * (std::sin(u) * std::sinh(v))) * (a / kn);
}

} // namespace

std::pair<DiscreteMeasure, DiscreteMeasure> generate(const InstanceFamily& f, std::uint64_t seed)
{
    if (f.dim != 1 && f.dim != 2) throw Error(ErrorKind::InvalidInput, "dimension must be 1 or 2");
    if (!(f.support_radius > 0.0) || f.support_radius > 5.0)
        throw Error(ErrorKind::InvalidInput, "support radius must lie in (0, 5]");
    if (!(f.scale >= 0.0)) throw Error(ErrorKind::InvalidInput, "scale must be non-negative");
    if (f.kind == FamilyKind::SmoothSine && f.mode == SineMode::Flow && f.dim == 2 && !(f.wave.norm() > 0.0))
        throw Error(ErrorKind::InvalidInput, "sine flow needs a non-zero wave vector");

    DiscreteMeasure lambda = lattice_measure(f.support_radius, f.spacing, f.dim);
    DiscreteMeasure mu = lambda;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double a = f.scale;
    Vec2 wave = f.wave;
    if (f.rotate_wave) {
        const double t = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
        wave = {std::cos(t) * f.wave.x - std::sin(t) * f.wave.y, std::sin(t) * f.wave.x + std::cos(t) * f.wave.y};
    }

    switch (f.kind) {
    case FamilyKind::Identity: break;
    case FamilyKind::SmoothSine:
        if (f.mode == SineMode::Density) {
            for (std::size_t i = 0; i < mu.size(); ++i)
                mu.weights[i] *= 1.0 + a * std::sin(dot(wave, mu.points[i]));
        } else {
            for (Vec2& x : mu.points) x = sine_flow(x, a, wave, f.dim);
            // Pairs pushed out of B_5 are dropped from both measures. Their sources lie outside B_4,
            // so neither the plan restricted to B_4 nor the data terms see them.
            DiscreteMeasure l2, m2;
            l2.dim = m2.dim = f.dim;
            for (std::size_t i = 0; i < mu.size(); ++i) {
                if (mu.points[i].norm() < 5.0) {
                    l2.add(lambda.points[i], lambda.weights[i]);
                    m2.add(mu.points[i], mu.weights[i]);
                } else if (lambda.points[i].norm() <= 4.0) {
                    throw Error(ErrorKind::InvalidInput, "sine flow moves B_4 out of B_5; reduce the scale");
                }
            }
            lambda = std::move(l2);
            mu = std::move(m2);
        }
        break;
    case FamilyKind::AtomicCloud: {
        const double j = 0.5 * a * f.spacing;
        auto jitter = [&](DiscreteMeasure& m) {
            for (Vec2& x : m.points) {
                x.x += j * unit(rng);
                if (f.dim == 2) x.y += j * unit(rng);
            }
        };
        jitter(lambda);
        jitter(mu);
        break;
    }
    case FamilyKind::AnnulusNoise:
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const double r = mu.points[i].norm();
            const double u = unit(rng);
            if (r >= 2.0 && r <= 4.0) mu.weights[i] *= 1.0 + a * u;
        }
        break;
    }

    for (const Vec2& x : mu.points)
        if (!(x.norm() < 5.0)) throw Error(ErrorKind::InvalidInput, "generated support leaves B_5; reduce the scale");
    for (double w : mu.weights)
        if (!(w >= 0.0)) throw Error(ErrorKind::InvalidInput, "generated negative weight; reduce the scale");
    equalize(lambda, mu);
    return {std::move(lambda), std::move(mu)};
}

// ---------------------------------------------------------------------------------------------
// configuration

CostSpec ExperimentConfig::cost() const
{
    if (cost_family == "radial") return CostSpec::radial(p, lambda_cap);
    if (cost_family == "anisotropic") return CostSpec::anisotropic(p, A, lambda_cap);
    throw Error(ErrorKind::Usage, "unknown cost family '" + cost_family + "'");
}

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string num_list(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
    return s;
}

double parse_double(const std::string& key, const std::string& s)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::Usage, fmt::format("{}: expected a number, got '{}'", key, s));
    }
}

long long parse_int(const std::string& key, const std::string& s)
{
    const double v = parse_double(key, s);
    if (v != std::floor(v)) throw Error(ErrorKind::Usage, fmt::format("{}: expected an integer, got '{}'", key, s));
    return static_cast<long long>(v);
}

bool parse_bool(const std::string& key, const std::string& s)
{
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw Error(ErrorKind::Usage, fmt::format("{}: expected true or false, got '{}'", key, s));
}

std::vector<double> parse_list(const std::string& key, const std::string& s)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(' ');
        const auto e = item.find_last_not_of(' ');
        if (b == std::string::npos) continue;
        out.push_back(parse_double(key, item.substr(b, e - b + 1)));
    }
    return out;
}

} // namespace

std::map<std::string, std::string> ExperimentConfig::canonical() const
{
    const auto& L = linearization;
    return {
        {"cost.family", cost_family},
        {"cost.p", num(p)},
        {"cost.lambda", num(lambda_cap)},
        {"cost.a11", num(A.a11)},
        {"cost.a12", num(A.a12)},
        {"cost.a22", num(A.a22)},
        {"instance.kind", to_string(family.kind)},
        {"instance.mode", to_string(family.mode)},
        {"instance.scale", num(family.scale)},
        {"instance.dim", std::to_string(family.dim)},
        {"instance.support_radius", num(family.support_radius)},
        {"instance.spacing", num(family.spacing)},
        {"instance.wave_x", num(family.wave.x)},
        {"instance.wave_y", num(family.wave.y)},
        {"instance.rotate_wave", family.rotate_wave ? "true" : "false"},
        {"resolution.n_theta", std::to_string(L.n_theta)},
        {"resolution.mesh_h", num(L.mesh_h)},
        {"resolution.mesh_grading", num(L.mesh_grading)},
        {"resolution.data_resolution", std::to_string(L.data_resolution)},
        {"resolution.radius_candidates", num_list(L.radius_candidates)},
        {"resolution.mollify_bins", num(L.mollify_bins)},
        {"resolution.samples", std::to_string(samples)},
        {"tolerance.tau", num(tau)},
        {"tolerance.gate", num(L.gate)},
        {"tolerance.solver_tol", num(L.solver_tol)},
        {"tolerance.max_iter", std::to_string(L.max_iter)},
        {"tolerance.term_constant", num(L.term_constant)},
        {"run.seed", std::to_string(seed)},
        {"run.seeds", std::to_string(seeds)},
        {"run.instances", std::to_string(instances)},
        {"run.scales", num_list(scales)},
        {"run.solve_raw", L.solve_raw ? "true" : "false"},
        {"run.time_resolved", L.time_resolved ? "true" : "false"},
        {"output.dir", output_dir},
    };
}

void ExperimentConfig::set(const std::string& key, const std::string& v)
{
    auto& L = linearization;
    if (key == "cost.family") cost_family = v;
    else if (key == "cost.p") p = parse_double(key, v);
    else if (key == "cost.lambda") lambda_cap = parse_double(key, v);
    else if (key == "cost.a11") A.a11 = parse_double(key, v);
    else if (key == "cost.a12") A.a12 = parse_double(key, v);
    else if (key == "cost.a22") A.a22 = parse_double(key, v);
    else if (key == "instance.kind") family.kind = parse_family_kind(v);
    else if (key == "instance.mode") family.mode = parse_sine_mode(v);
    else if (key == "instance.scale") family.scale = parse_double(key, v);
    else if (key == "instance.dim") family.dim = static_cast<int>(parse_int(key, v));
    else if (key == "instance.support_radius") family.support_radius = parse_double(key, v);
    else if (key == "instance.spacing") family.spacing = parse_double(key, v);
    else if (key == "instance.wave_x") family.wave.x = parse_double(key, v);
    else if (key == "instance.wave_y") family.wave.y = parse_double(key, v);
    else if (key == "instance.rotate_wave") family.rotate_wave = parse_bool(key, v);
    else if (key == "resolution.n_theta") L.n_theta = static_cast<int>(parse_int(key, v));
    else if (key == "resolution.mesh_h") L.mesh_h = parse_double(key, v);
    else if (key == "resolution.mesh_grading") L.mesh_grading = parse_double(key, v);
    else if (key == "resolution.data_resolution") L.data_resolution = static_cast<int>(parse_int(key, v));
    else if (key == "resolution.radius_candidates") L.radius_candidates = parse_list(key, v);
    else if (key == "resolution.mollify_bins") L.mollify_bins = parse_double(key, v);
    else if (key == "resolution.samples") samples = static_cast<std::uint64_t>(parse_int(key, v));
    else if (key == "tolerance.tau") tau = parse_double(key, v);
    else if (key == "tolerance.gate") L.gate = parse_double(key, v);
    else if (key == "tolerance.solver_tol") L.solver_tol = parse_double(key, v);
    else if (key == "tolerance.max_iter") L.max_iter = static_cast<int>(parse_int(key, v));
    else if (key == "tolerance.term_constant") L.term_constant = parse_double(key, v);
    else if (key == "run.seed") seed = static_cast<std::uint64_t>(parse_int(key, v));
    else if (key == "run.seeds") seeds = static_cast<int>(parse_int(key, v));
    else if (key == "run.instances") instances = static_cast<int>(parse_int(key, v));
    else if (key == "run.scales") scales = parse_list(key, v);
    else if (key == "run.solve_raw") L.solve_raw = parse_bool(key, v);
    else if (key == "run.time_resolved") L.time_resolved = parse_bool(key, v);
    else if (key == "output.dir") output_dir = v;
    else throw Error(ErrorKind::Usage, "unknown configuration key '" + key + "'");
}

void ExperimentConfig::validate() const
{
    const auto& L = linearization;
    auto need = [](bool ok, const char* what) {
        if (!ok) throw Error(ErrorKind::InvalidInput, std::string(what) + " must be positive");
    };
    need(L.n_theta > 0, "resolution.n_theta");
    need(L.mesh_h > 0.0, "resolution.mesh_h");
    need(L.mesh_grading >= 1.0, "resolution.mesh_grading");
    need(L.data_resolution > 0, "resolution.data_resolution");
    need(L.mollify_bins >= 0.0, "resolution.mollify_bins");
    need(!L.radius_candidates.empty(), "resolution.radius_candidates");
    need(samples > 0, "resolution.samples");
    need(family.spacing > 0.0, "instance.spacing");
    need(seeds > 0, "run.seeds");
    need(instances > 0, "run.instances");
    need(L.max_iter > 0, "tolerance.max_iter");
    need(L.solver_tol > 0.0, "tolerance.solver_tol");
}

ExperimentConfig read_config(std::istream& is)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorKind::Usage, std::string("config: ") + e.what());
    }
    ExperimentConfig c;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw Error(ErrorKind::Usage, "config: key '" + section + "' outside a section");
        for (const auto& [key, value] : body) c.set(section + "." + key, value.get_value<std::string>());
    }
    c.validate();
    return c;
}

void write_config(std::ostream& os, const ExperimentConfig& config)
{
    std::string section;
    for (const auto& [key, value] : config.canonical()) {
        const auto dot = key.find('.');
        const std::string s = key.substr(0, dot);
        if (s != section) {
            os << (section.empty() ? "" : "\n") << '[' << s << "]\n";
            section = s;
        }
        os << key.substr(dot + 1) << " = " << value << '\n';
    }
}

// ---------------------------------------------------------------------------------------------
// hashing, files

std::string sha256_hex(const std::string& data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorKind::Io, "SHA-256 failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

std::string cache_key(const std::map<std::string, std::string>& canonical, const std::string& stage)
{
    std::string text = "stage=" + stage + "\n";
    // where results are written does not change them
    for (const auto& [k, v] : canonical)
        if (k != "output.dir") text += k + "=" + v + "\n";
    return sha256_hex(text);
}

std::string cache_key(const ExperimentConfig& config, const std::string& stage)
{
    return cache_key(config.canonical(), stage);
}

std::string resolve_output_dir(const std::string& configured)
{
    if (const char* env = std::getenv("OTLIN_OUTPUT_ROOT"); env && *env) return env;
    return configured;
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    std::error_code ec;
    if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
        out << text;
        if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
    }
    fs::rename(tmp, target, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot rename onto " + path + ": " + ec.message());
}

// ---------------------------------------------------------------------------------------------
// reports

std::vector<std::pair<std::string, double>> suite_constants(const CostSpec& cost)
{
    const double p = cost.p();
    return {
        {"convexity_constant", 1.0 / cost.lambda_cap()},
        {"triangle_C_eps_0.1", triangle_constant(p, 0.1)},
        {"triangle_C_eps_0.5", triangle_constant(p, 0.5)},
        {"add_constant_bound", add_constant_bound(p)},
        {"annulus_epsilon", kAnnulusEpsilon},
        {"displacement_exponent", 1.0 / (p + 2.0)},
        {"ledger_slack", 1e-8},
    };
}

namespace {

ordered_json header(const std::string& kind, const ExperimentConfig& config, const std::string& stage,
                    const std::vector<std::string>& tags)
{
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = kind;
    j["config_hash"] = cache_key(config, stage);
    ordered_json cfg = ordered_json::object();
    for (const auto& [k, v] : config.canonical())
        if (k != "output.dir") cfg[k] = v;
    j["config"] = cfg;
    ordered_json consts = ordered_json::object();
    for (const auto& [k, v] : suite_constants(config.cost())) consts[k] = v;
    j["suite_constants"] = consts;
    j["checks"] = tags;
    return j;
}

ordered_json solve_json(const SolveInfo& s)
{
    return {{"iterations", s.iterations}, {"residual", s.residual}, {"threshold", s.threshold},
            {"energy", s.energy}, {"monotone", s.monotone}};
}

ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

} // namespace

std::string report_json(const LinearizationReport& r, const ExperimentConfig& config)
{
    auto j = header("linearization", config, "linearize", {"orthogonality", "linfty", "main-estimate"});
    ordered_json body;
    body["dim"] = r.dim;
    body["cost"] = r.cost;
    body["tau"] = r.tau_tolerance;
    body["gate"] = r.gate;
    body["gate_passed"] = r.gate_passed;
    body["smallness"] = {{"E4", r.smallness.E4},
                         {"E4_plain", r.smallness.E4_plain},
                         {"E4_total", r.smallness.E4_total},
                         {"D4", r.smallness.D4},
                         {"D4_total", r.smallness.D4_total}};
    body["R_selected"] = r.R_selected;
    ordered_json scores = ordered_json::array();
    for (const auto& s : r.radius_scores)
        scores.push_back({{"R", s.R}, {"crossing_cost", s.crossing_cost}, {"D_R", s.D_R},
                          {"boundary_lp", s.boundary_lp}, {"score", s.score}});
    body["radius_scores"] = scores;
    body["mollify_radius"] = r.mollify_radius;
    body["c_R"] = r.c_R;
    body["mesh_nodes"] = r.mesh_nodes;
    body["lhs_main"] = r.lhs_main;
    body["lhs_main_raw"] = r.lhs_main_raw;
    body["lhs_main_time"] = r.lhs_main_time;
    body["main_entries"] = r.main_entries;
    body["main_clamped"] = r.main_clamped;
    const auto& L = r.ledger;
    body["ledger"] = {{"lhs_V", L.lhs_V},
                      {"term_a", L.term_a},
                      {"term_b", L.term_b},
                      {"term_c", L.term_c},
                      {"rhs", L.rhs},
                      {"convexity_constant", L.convexity_constant},
                      {"time_slack", L.time_slack},
                      {"bregman", L.bregman},
                      {"identity_defect", L.identity_defect},
                      {"omega_mass", L.omega_mass},
                      {"entries", L.entries},
                      {"pieces", L.pieces},
                      {"clamped_pieces", L.clamped_pieces},
                      {"pass", L.pass}};
    const auto& T = r.terms;
    body["terms"] = {{"energy_gap", T.energy_gap}, {"pairing", T.pairing},   {"fubini_gap", T.fubini_gap},
                     {"constant", T.constant},     {"budget", T.budget},     {"pass_energy", T.pass_energy},
                     {"pass_pairing", T.pass_pairing}, {"pass_fubini", T.pass_fubini}, {"pass", T.pass}};
    body["sup_gradient"] = r.sup_gradient;
    body["energy_gradient"] = r.energy_gradient;
    body["gradient_ratio"] = finite_or_null(r.gradient_ratio);
    body["vc_ratio"] = finite_or_null(r.vc_ratio);
    body["vc_applicable"] = r.vc_applicable;
    body["displacement"] = {{"sup_disp", r.displacement.sup_disp},
                            {"bound_check", finite_or_null(r.displacement.bound_check)},
                            {"exponent", r.displacement.exponent}};
    body["boundary_density_ratio"] = r.boundary_density_ratio;
    body["boundary_density_ok"] = r.boundary_density_ok;
    body["solve"] = solve_json(r.solve_info);
    body["solve_raw"] = solve_json(r.solve_info_raw);
    j["report"] = body;
    return j.dump(2) + "\n";
}

std::string study_json(const ScalingStudy& study, const ExperimentConfig& config)
{
    auto j = header("scaling-study", config, "study", {"main-estimate"});
    ordered_json rows = ordered_json::array();
    for (const auto& r : study.rows)
        rows.push_back({{"scale", r.scale}, {"seed", r.seed}, {"E4", r.E4}, {"D4", r.D4}, {"lhs_main", r.lhs_main},
                        {"sup_disp", r.sup_disp}, {"R_selected", r.R_selected},
                        {"gradient_ratio", finite_or_null(r.gradient_ratio)}, {"error", r.error}});
    j["rows"] = rows;
    j["slope"] = finite_or_null(study.slope);
    j["degenerate"] = study.degenerate;
    return j.dump(2) + "\n";
}

std::string assumptions_json(const AssumptionReport& r)
{
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "cost-assumptions";
    j["cost"] = r.cost;
    j["lambda"] = r.lambda_cap;
    j["samples"] = r.samples;
    j["seed"] = r.seed;
    ordered_json checks = ordered_json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name}, {"worst_constant", finite_or_null(c.worst_constant)},
                          {"allowed_constant", c.allowed_constant}, {"derived", c.derived},
                          {"witness", c.witness}, {"pass", c.pass}});
    j["checks"] = checks;
    j["fenchel_young_min_gap"] = r.fenchel_young_min_gap;
    j["fenchel_young_max_equality_gap"] = r.fenchel_young_max_equality_gap;
    j["round_trip_max_error"] = r.round_trip_max_error;
    j["pass"] = r.pass;
    return j.dump(2) + "\n";
}

void write_schema(std::ostream& os)
{
    os << R"(# Output schema

Every JSON file carries `schema_version` (currently )" << kSchemaVersion << R"(), `kind`, and for
experiment outputs `config_hash` (SHA-256 of the stage name and the canonical configuration),
`config` (the canonical `section.key → value` map), `suite_constants` and `checks` (names of the
checks the numbers feed).

## CSV files

| file | columns |
|------|---------|
| `plan.csv` | `i,j,mass` – optimal plan entries (source index, target index, mass) |
| `study.csv` | `scale,seed,E4,D4,lhs_main,sup_disp,R_selected,gradient_ratio` – one row per instance (scale and seed); `E4` uses the plain volume normalisation |
| `study.dat` | two whitespace-separated columns `log(E4) log(lhs_main)` |
| `lemma-<name>.csv` | `seed` followed by the per-lemma columns listed below, then `pass` (0/1) |
| `summary.csv` | `file,kind,pass` – one row per JSON result in the output directory |

### Lemma columns

| lemma | columns |
|-------|---------|
| triangle | `p,eps,w13,w12,w23,lhs,rhs,C,ratio,ac_numerator,ac_denominator,ac_ratio,ac_bound` (`ac_*`: adding a common measure) |
| projection | `p,R,lower_ratio,upper_ratio,left,middle,right` |
| linfty | `p,scale,E4,D4,sup_disp,bound_check` |
| c2measures | `p,alpha,R,lhs,rhs,K,ratio` |
| localisation | `p,R,lhs,w_local,smallness,rhs,ratio` |
| data-restriction | `p,scale,integral,D4,ratio` |
| regularity | `p,energy_ratio,alt_energy_ratio,interior_ratio,diff_ratio,fitted_s,holder_lhs,holder_rhs,holder_ratio` |
| orthogonality | `p,scale,lhs_V,term_a,term_b,term_c,rhs,convexity_constant,identity_defect,p2_identity_defect` |

## JSON kinds

- `cost-assumptions`: per-inequality `{name, worst_constant, allowed_constant, derived, witness, pass}`.
- `linearization`: `report` holds smallness (`E4`, `E4_plain`, `E4_total`, `D4`, `D4_total`), `R_selected`,
  `radius_scores`, `lhs_main` (plus `_raw`, `_time` variants), the `ledger` terms, the three error `terms`,
  gradient bounds, `displacement` and solver statistics.
- `scaling-study`: `rows` mirroring `study.csv`, fitted `slope`, `degenerate`.
- `lemma-battery`: `lemma`, `columns`, `ratio_columns`, `spread` (max/median per ratio column), `pass`.
- `ot-plan`: `total_cost`, `dual_certificate`, `marginal_error`, `entries`.

`null` marks a quantity that is undefined for the instance (for example a ratio with zero denominator).
)";
}

} // namespace otlin
