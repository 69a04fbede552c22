/// Command line front end over the harness.
#include "otlin/battery.hpp"
#include "otlin/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace otlin {

namespace {

namespace fs = std::filesystem;

/// Flags shared by the experiment subcommands; unset flags leave the configuration alone.
struct CommonFlags {
    std::optional<std::string> cost_family, kind, mode;
    std::optional<double> p, lambda, a11, a12, a22, scale, spacing, support, wave_x, wave_y, tau, mesh_h, gate;
    std::optional<int> dim, n_theta;
    std::optional<std::uint64_t> seed;
    bool rotate_wave = false;

    void attach(CLI::App* app, bool instance)
    {
        app->add_option("--cost", cost_family, "cost family: radial | anisotropic");
        app->add_option("--p", p, "exponent p > 1");
        app->add_option("--lambda", lambda, "certified ellipticity constant");
        app->add_option("--a11", a11);
        app->add_option("--a12", a12);
        app->add_option("--a22", a22);
        app->add_option("--seed", seed, "instance seed");
        if (!instance) return;
        app->add_option("--family", kind, "identity | smooth-sine | atomic-cloud | annulus-noise");
        app->add_option("--mode", mode, "sine mode: flow | density");
        app->add_option("--scale", scale, "family amplitude");
        app->add_option("--spacing", spacing, "lattice spacing");
        app->add_option("--support", support, "support radius of the base lattice");
        app->add_option("--wave-x", wave_x);
        app->add_option("--wave-y", wave_y);
        app->add_flag("--rotate-wave", rotate_wave, "turn the wave vector by a seed-drawn angle");
        app->add_option("--dim", dim, "dimension 1 or 2");
        app->add_option("--tau", tau, "tolerance τ of the error terms");
        app->add_option("--mesh-h", mesh_h);
        app->add_option("--n-theta", n_theta);
        app->add_option("--gate", gate, "admissible E(4) + D(4)");
    }

    void apply(ExperimentConfig& c) const
    {
        auto set = [&](const char* key, const auto& v) {
            if (!v) return;
            if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, std::string>) c.set(key, *v);
            else c.set(key, fmt::format("{}", *v));
        };
        set("cost.family", cost_family);
        set("cost.p", p);
        set("cost.lambda", lambda);
        set("cost.a11", a11);
        set("cost.a12", a12);
        set("cost.a22", a22);
        set("run.seed", seed);
        set("instance.kind", kind);
        set("instance.mode", mode);
        set("instance.scale", scale);
        set("instance.spacing", spacing);
        set("instance.support_radius", support);
        set("instance.wave_x", wave_x);
        set("instance.wave_y", wave_y);
        if (rotate_wave) c.set("instance.rotate_wave", "true");
        set("instance.dim", dim);
        set("tolerance.tau", tau);
        set("resolution.mesh_h", mesh_h);
        set("resolution.n_theta", n_theta);
        set("tolerance.gate", gate);
    }
};

struct Context {
    ExperimentConfig config;
    std::string dir;
    std::ostream& out;
    std::ostream& err;

    std::string path(const std::string& name) const { return (fs::path(dir) / name).string(); }

    void log(const std::string& line) const
    {
        std::error_code ec;
        fs::create_directories(dir, ec);
        std::ofstream f(path("run.log"), std::ios::app);
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        f << stamp << ' ' << line << '\n';
    }

    int finish(bool pass, const std::string& summary) const
    {
        out << summary << '\n';
        log(summary);
        return pass ? kExitPass : kExitCheckFailed;
    }
};

int cmd_check_cost(Context& ctx)
{
    const auto& c = ctx.config;
    const auto rep = verify_assumptions(c.cost(), c.samples, c.seed);
    write_text(ctx.path("check-cost.json"), assumptions_json(rep));
    int failed = 0;
    for (const auto& k : rep.checks) failed += k.pass ? 0 : 1;
    return ctx.finish(rep.pass, fmt::format("check-cost {}: {} ({} checks, {} failed)", rep.cost,
                                            rep.pass ? "pass" : "FAIL", rep.checks.size(), failed));
}

DiscreteMeasure read_measure_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
    return read_measure_csv(in);
}

int cmd_ot_solve(Context& ctx, const std::string& source_csv, const std::string& target_csv)
{
    const auto& c = ctx.config;
    DiscreteMeasure lam, mu;
    if (source_csv.empty() != target_csv.empty())
        throw Error(ErrorKind::Usage, "--source and --target must be given together");
    if (!source_csv.empty()) {
        lam = read_measure_file(source_csv);
        mu = read_measure_file(target_csv);
    } else {
        std::tie(lam, mu) = generate(c.family, c.seed);
    }
    const auto plan = solve_exact(lam, mu, c.cost());
    std::ostringstream csv;
    csv << "i,j,mass\n";
    for (const auto& e : plan.entries) csv << fmt::format("{},{},{:.17g}\n", e.i, e.j, e.mass);
    write_text(ctx.path("plan.csv"), csv.str());
    const bool ok = plan.dual_certificate <= 1e-9 && plan.marginal_error() <= 1e-9;
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "ot-plan";
    j["config_hash"] = cache_key(c, "ot");
    j["cost"] = c.cost().describe();
    j["source_atoms"] = lam.size();
    j["target_atoms"] = mu.size();
    j["total_cost"] = plan.total_cost;
    j["dual_certificate"] = plan.dual_certificate;
    j["marginal_error"] = plan.marginal_error();
    j["entries"] = plan.entries.size();
    j["pass"] = ok;
    write_text(ctx.path("plan.json"), j.dump(2) + "\n");
    return ctx.finish(ok, fmt::format("ot solve: {} x {} atoms, cost {:.10g}, {} entries: {}", lam.size(), mu.size(),
                                      plan.total_cost, plan.entries.size(), ok ? "pass" : "FAIL"));
}

int cmd_verify(Context& ctx, const std::string& lemma, int seeds, std::uint64_t first_seed)
{
    if (!is_lemma_name(lemma)) {
        std::string known;
        for (const auto& n : lemma_names()) known += (known.empty() ? "" : ", ") + n;
        throw Error(ErrorKind::Usage, "unknown lemma '" + lemma + "' (known: " + known + ")");
    }
    const auto b = run_lemma_battery(lemma, seeds, first_seed);
    std::ostringstream csv;
    write_battery_csv(csv, b);
    auto key_cfg = ctx.config.canonical();
    key_cfg["battery.lemma"] = lemma;
    key_cfg["battery.seeds"] = std::to_string(seeds);
    key_cfg["battery.first_seed"] = std::to_string(first_seed);
    write_text(ctx.path("lemma-" + lemma + ".csv"), csv.str());
    write_text(ctx.path("lemma-" + lemma + ".json"), battery_json(b, cache_key(key_cfg, "verify")));
    const auto failed = std::count(b.row_pass.begin(), b.row_pass.end(), false);
    std::string spread;
    for (std::size_t k = 0; k < b.ratio_columns.size(); ++k)
        spread += fmt::format(" {}={:.3g}", b.ratio_columns[k], b.spread[k]);
    return ctx.finish(b.pass, fmt::format("verify lemma {}: {} rows, {} failed, spread{}: {}", lemma, b.rows.size(),
                                          failed, spread.empty() ? " n/a" : spread, b.pass ? "pass" : "FAIL"));
}

int cmd_linearize(Context& ctx, bool use_cache)
{
    const auto& c = ctx.config;
    bool gate_ok = true;
    auto compute = [&] {
        const auto [lam, mu] = generate(c.family, c.seed);
        try {
            return report_json(run_linearization(lam, mu, c.cost(), c.tau, c.linearization), c);
        } catch (const GateError& e) {
            return report_json(e.report(), c);
        }
    };
    const std::string key = cache_key(c, "linearize");
    const std::string text = use_cache ? cached(ctx.dir, key, compute) : compute();
    write_text(ctx.path("linearize.json"), text);
    const auto j = nlohmann::json::parse(text);
    const auto& r = j.at("report");
    gate_ok = r.at("gate_passed").get<bool>();
    const bool ok = gate_ok && r.at("ledger").at("pass").get<bool>();
    return ctx.finish(ok, fmt::format("linearize {} scale {}: R* = {:.3g}, E4 = {:.4g}, D4 = {:.4g}, lhs_main = {:.4g}, "
                                      "ledger {}{}",
                                      to_string(c.family.kind), c.family.scale, r.at("R_selected").get<double>(),
                                      r.at("smallness").at("E4_plain").get<double>(),
                                      r.at("smallness").at("D4").get<double>(), r.at("lhs_main").get<double>(),
                                      r.at("ledger").at("pass").get<bool>() ? "pass" : "FAIL",
                                      gate_ok ? "" : " (gate exceeded)"));
}

int cmd_study(Context& ctx, bool use_cache)
{
    const auto& c = ctx.config;
    if (c.scales.size() < 3) throw Error(ErrorKind::Usage, "a scaling study needs at least three scales");
    auto compute = [&] {
        SeededGenerator gen = [&](double a, std::uint64_t seed) {
            InstanceFamily f = c.family;
            f.scale = a;
            return generate(f, seed);
        };
        std::vector<std::uint64_t> seeds;
        for (int k = 0; k < c.instances; ++k) seeds.push_back(c.seed + static_cast<std::uint64_t>(k));
        return study_json(scaling_study(gen, c.scales, seeds, c.cost(), c.tau, c.linearization), c);
    };
    const std::string text = use_cache ? cached(ctx.dir, cache_key(c, "study"), compute) : compute();
    write_text(ctx.path("study.json"), text);

    const auto j = nlohmann::json::parse(text);
    ScalingStudy st;
    for (const auto& r : j.at("rows")) {
        ScalingRow row;
        row.scale = r.at("scale");
        row.seed = r.at("seed");
        row.gradient_ratio = r.at("gradient_ratio").is_null() ? std::nan("") : r.at("gradient_ratio").get<double>();
        row.E4 = r.at("E4");
        row.D4 = r.at("D4");
        row.lhs_main = r.at("lhs_main");
        row.sup_disp = r.at("sup_disp");
        row.R_selected = r.at("R_selected");
        row.error = r.at("error");
        st.rows.push_back(row);
    }
    st.degenerate = j.at("degenerate");
    st.slope = j.at("slope").is_null() ? 0.0 : j.at("slope").get<double>();
    std::ostringstream csv, dat;
    write_study_csv(csv, st);
    write_study_dat(dat, st);
    write_text(ctx.path("study.csv"), csv.str());
    write_text(ctx.path("study.dat"), dat.str());
    std::size_t errors = 0;
    for (const auto& r : st.rows) errors += r.error.empty() ? 0 : 1;
    const bool ok = errors == 0 && (st.degenerate || st.slope > 1.0);
    return ctx.finish(ok, fmt::format("study scaling: {} scales, {} errors, slope {}: {}", st.rows.size(), errors,
                                      st.degenerate ? std::string("degenerate") : fmt::format("{:.4g}", st.slope),
                                      ok ? "pass" : "FAIL"));
}

int cmd_report(Context& ctx)
{
    std::vector<fs::path> files;
    if (fs::is_directory(ctx.dir))
        for (const auto& e : fs::directory_iterator(ctx.dir))
            if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::ostringstream csv;
    csv << "file,kind,pass\n";
    bool all = true;
    std::size_t n = 0;
    for (const auto& f : files) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_text(f.string()));
        } catch (const nlohmann::json::exception&) {
            continue;
        }
        if (!j.is_object() || !j.contains("schema_version")) continue;
        bool pass = true;
        if (j.contains("pass")) pass = j["pass"].get<bool>();
        else if (j.contains("report")) pass = j["report"]["gate_passed"].get<bool>() && j["report"]["ledger"]["pass"].get<bool>();
        else if (j.contains("degenerate")) pass = j["degenerate"].get<bool>() || (j["slope"].is_number() && j["slope"].get<double>() > 1.0);
        all = all && pass;
        ++n;
        csv << f.filename().string() << ',' << j.value("kind", "") << ',' << (pass ? 1 : 0) << '\n';
    }
    write_text(ctx.path("summary.csv"), csv.str());
    std::ostringstream schema;
    write_schema(schema);
    write_text(ctx.path("SCHEMA.md"), schema.str());
    return ctx.finish(all, fmt::format("report: {} results in {}: {}", n, ctx.dir, all ? "pass" : "FAIL"));
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Numerical laboratory for the geometric linearisation of optimal transport with p-costs", "otlin"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand
    std::string out_dir, config_file;
    std::vector<std::string> assignments;
    app.add_option("--out", out_dir, "output directory (default: $OTLIN_OUTPUT_ROOT, then the configured one)");
    app.add_option("--config", config_file, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--set", assignments, "section.key=value override (repeatable)");

    CommonFlags common;
    std::uint64_t samples = 0;
    auto* check = app.add_subcommand("check-cost", "sample the structural inequalities of the cost");
    common.attach(check, false);
    check->add_option("--samples", samples, "number of samples");
    check->add_option("--family", common.cost_family, "radial | anisotropic");

    auto* ot = app.add_subcommand("ot", "optimal transport");
    ot->require_subcommand(1);
    auto* solve = ot->add_subcommand("solve", "solve a discrete problem exactly and write the plan");
    std::string source_csv, target_csv;
    common.attach(solve, true);
    solve->add_option("--source", source_csv, "source measure CSV (x,y,weight)");
    solve->add_option("--target", target_csv, "target measure CSV");

    auto* verify = app.add_subcommand("verify", "run an inequality battery");
    verify->require_subcommand(1);
    auto* lemma_cmd = verify->add_subcommand("lemma", "run the battery of one lemma");
    std::string lemma;
    int seeds = 0;
    std::uint64_t first_seed = 1;
    lemma_cmd->add_option("name", lemma, "triangle | projection | linfty | c2measures | localisation | "
                                         "data-restriction | regularity | orthogonality")
        ->required();
    lemma_cmd->add_option("--seeds", seeds, "number of instances (default: run.seeds)");
    lemma_cmd->add_option("--first-seed", first_seed, "seed of the first instance");

    bool no_cache = false;
    auto* lin = app.add_subcommand("linearize", "run the linearisation pipeline on one instance");
    common.attach(lin, true);
    lin->add_flag("--no-cache", no_cache, "recompute even when a cached result exists");

    auto* study = app.add_subcommand("study", "parameter studies");
    study->require_subcommand(1);
    auto* scaling = study->add_subcommand("scaling", "lhs_main against E(4) over instance scales");
    std::vector<double> scales;
    common.attach(scaling, true);
    scaling->add_option("--scales", scales, "instance scales")->delimiter(',');
    std::optional<int> instances;
    scaling->add_option("--instances", instances, "instances per scale (consecutive seeds)");
    scaling->add_flag("--no-cache", no_cache, "recompute even when a cached result exists");

    auto* report = app.add_subcommand("report", "summarise the results in the output directory and write SCHEMA.md");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitPass;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << "run 'otlin --help' for usage\n";
        return kExitUsage;
    }

    try {
        ExperimentConfig config;
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            config = read_config(in);
        }
        for (const auto& a : assignments) {
            const auto eq = a.find('=');
            if (eq == std::string::npos) throw Error(ErrorKind::Usage, "--set expects section.key=value, got '" + a + "'");
            config.set(a.substr(0, eq), a.substr(eq + 1));
        }
        common.apply(config);
        if (samples) config.samples = samples;
        if (!scales.empty()) config.scales = scales;
        if (instances) config.set("run.instances", std::to_string(*instances));
        config.output_dir = out_dir.empty() ? resolve_output_dir(config.output_dir) : out_dir;
        config.validate();

        Context ctx{config, config.output_dir, out, err};
        if (check->parsed()) return cmd_check_cost(ctx);
        if (solve->parsed()) return cmd_ot_solve(ctx, source_csv, target_csv);
        if (lemma_cmd->parsed()) return cmd_verify(ctx, lemma, seeds > 0 ? seeds : config.seeds, first_seed);
        if (lin->parsed()) return cmd_linearize(ctx, !no_cache);
        if (scaling->parsed()) return cmd_study(ctx, !no_cache);
        if (report->parsed()) return cmd_report(ctx);
        err << "usage error: no command\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << (e.kind() == ErrorKind::Usage ? "usage error: " : "error: ") << e.what() << '\n';
        return e.kind() == ErrorKind::Usage ? kExitUsage : kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
}

} // namespace otlin
