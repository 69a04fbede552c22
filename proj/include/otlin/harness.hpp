/**
 * @file harness.hpp
 * @brief Instance families, experiment configuration, content-hash cache keys and JSON reports.
 */
#pragma once

#include "otlin/pipeline.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace otlin {

inline constexpr int kSchemaVersion = 1;

enum class FamilyKind { SmoothSine, AtomicCloud, AnnulusNoise, Identity };
enum class SineMode { Density, Flow };

const char* to_string(FamilyKind kind) noexcept;
const char* to_string(SineMode mode) noexcept;
FamilyKind parse_family_kind(const std::string& s);
SineMode parse_sine_mode(const std::string& s);

/// λ is a square lattice of the given spacing restricted to B_{support_radius}, with cell-area weights.
///
/// SmoothSine, Density: μ has the same atoms with weights scaled by 1 + a·sin(k·x).
/// SmoothSine, Flow:    μ = (Id + a∇ψ)_#λ, ψ(x) = sin(k·x) cosh(k^⊥·x)/|k| (harmonic, so μ stays
///                      close to uniform while mass is displaced). In d = 1 the flow is a translation by a.
///                      Pairs whose image leaves B_5 are dropped; their sources must lie outside B_4.
/// AtomicCloud:         λ and μ are two independent jitters of the lattice, jitter a·spacing.
/// AnnulusNoise:        μ has the lattice atoms with weights multiplied by 1 + a·u, u uniform in
///                      (−1, 1), on the annulus 2 ≤ |x| ≤ 4.
/// Identity:            μ = λ.
/// μ is rescaled to the mass of λ.
struct InstanceFamily {
    FamilyKind kind = FamilyKind::SmoothSine;
    SineMode mode = SineMode::Flow;
    double scale = 0.1;
    int dim = 2;
    double support_radius = 4.4;
    double spacing = 0.2;
    Vec2 wave{0.5, 0.0};
    bool rotate_wave = false;  ///< sine families: turn the wave vector by a seed-drawn angle in [0, 2π)
};

std::pair<DiscreteMeasure, DiscreteMeasure> generate(const InstanceFamily& family, std::uint64_t seed);

/// Square lattice {(i+½)s, (j+½)s} ∩ B_R (d = 2) or {(i+½)s} ∩ (−R, R) (d = 1).
DiscreteMeasure lattice_measure(double R, double spacing, int dim);

struct ExperimentConfig {
    std::string cost_family = "radial";
    double p = 2.0;
    double lambda_cap = 2.0;
    Mat2 A{};
    InstanceFamily family;
    LinearizationConfig linearization;
    double tau = 0.1;
    std::vector<double> scales{0.4, 0.3, 0.2};
    std::uint64_t seed = 1;
    int seeds = 20;
    int instances = 1;  ///< scaling study: instances per scale, seeds seed … seed + instances − 1
    std::uint64_t samples = 10000;
    std::string output_dir = "otlin-out";

    CostSpec cost() const;
    /// Sorted `section.key → value` with numbers printed to round-trip precision.
    std::map<std::string, std::string> canonical() const;
    /// Applies one `section.key=value` assignment; throws a usage error on unknown keys.
    void set(const std::string& key, const std::string& value);
    /// Throws unless every resolution is positive.
    void validate() const;
};

/// INI text with sections [cost], [instance], [resolution], [tolerance], [run], [output].
ExperimentConfig read_config(std::istream& is);
void write_config(std::ostream& os, const ExperimentConfig& config);

/// SHA-256 over the stage name and the canonical serialisation.
std::string cache_key(const ExperimentConfig& config, const std::string& stage);
std::string cache_key(const std::map<std::string, std::string>& canonical, const std::string& stage);
std::string sha256_hex(const std::string& data);

/// Directory for outputs: $OTLIN_OUTPUT_ROOT when set, otherwise the configured directory.
std::string resolve_output_dir(const std::string& configured);

/// Reads `<dir>/cache/<key>.json` when present; otherwise computes, stores and returns the text.
template <class F>
std::string cached(const std::string& dir, const std::string& key, F&& compute);

std::string read_text(const std::string& path);
/// Writes through a temporary file and a rename, so readers never see a partial file.
void write_text(const std::string& path, const std::string& text);

/// Constants the checks are evaluated with, for embedding in reports.
std::vector<std::pair<std::string, double>> suite_constants(const CostSpec& cost);

std::string report_json(const LinearizationReport& report, const ExperimentConfig& config);
std::string study_json(const ScalingStudy& study, const ExperimentConfig& config);
std::string assumptions_json(const AssumptionReport& report);

/// Markdown description of every CSV and JSON output.
void write_schema(std::ostream& os);

/// Exit codes of the command line.
enum ExitCode : int { kExitPass = 0, kExitError = 1, kExitCheckFailed = 2, kExitUsage = 64 };

/// Command line entry point: check-cost, ot solve, verify lemma, linearize, study scaling, report.
/// Prints one summary line per command to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------------------------

template <class F>
std::string cached(const std::string& dir, const std::string& key, F&& compute)
{
    const std::string path = dir + "/cache/" + key + ".json";
    try {
        return read_text(path);
    } catch (const Error&) {
    }
    std::string text = compute();
    write_text(path, text);
    return text;
}

} // namespace otlin
