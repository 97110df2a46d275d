#pragma once

#include "cil/config.hpp"
#include "cil/harris.hpp"
#include "cil/process.hpp"
#include "cil/stats.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace cil {

/// Fully resolved settings of one experiment. `values` holds every key the
/// command understands, defaults filled in, as text; the typed fields mirror
/// the shared keys.
struct ExperimentConfig {
    std::string name;
    Rates rates;
    double horizon = 0.0;
    int reps = 0;
    std::uint64_t seed = 0;
    WindowPolicy window;
    double guard = 20.0;
    std::filesystem::path out;
    unsigned threads = 1;
    std::map<std::string, std::string> values;

    const std::string& text(const std::string& key) const;
    double real(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    std::vector<double> reals(const std::string& key) const;

    /// Sorted `key = value` lines of everything that affects results
    /// (`out` and `threads` excluded).
    std::string canonical() const;
    /// FNV-1a of the command name and canonical text, as 16 hex digits.
    std::string hash() const;
    /// out / <name>-<hash>.
    std::filesystem::path output_dir() const;
};

std::vector<std::string> experiment_names();

/// Fills defaults for `command`, applies the given settings, validates.
/// Throws ConfigError on unknown keys or bad values.
ExperimentConfig resolve_config(const std::string& command, const Config& settings);

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::map<std::string, double> scalars;
    std::map<std::string, Series> series;
    /// Per-replication CSV tables by file stem; every row starts with rep,seed.
    std::map<std::string, std::string> tables;
    std::vector<std::uint64_t> seeds;
    std::vector<Verdict> verdicts;
    /// Not part of the summary, so summaries stay byte-identical across runs.
    double wall_seconds = 0.0;

    bool passed() const;
    std::string summary_json() const;
};

/// Writes config.txt, summary.json, timing.json, seeds.csv, one CSV per series
/// and per table into `dir` (created if missing).
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

ExperimentResult cmd_duality_check(const ExperimentConfig& cfg);
ExperimentResult cmd_tightness(const ExperimentConfig& cfg);
ExperimentResult cmd_clt(const ExperimentConfig& cfg);
ExperimentResult cmd_fdd(const ExperimentConfig& cfg);
ExperimentResult cmd_sigma_dual(const ExperimentConfig& cfg);
ExperimentResult cmd_regeneration(const ExperimentConfig& cfg);
ExperimentResult cmd_coalescence(const ExperimentConfig& cfg);
ExperimentResult cmd_truncation(const ExperimentConfig& cfg);
ExperimentResult cmd_survival(const ExperimentConfig& cfg);

/// Dispatch on cfg.name; fills wall_seconds.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Runs f(0), ..., f(n - 1) on up to `threads` workers and returns the
/// results in index order. The first exception is rethrown.
template <class T>
std::vector<T> parallel_map(std::size_t n, unsigned threads, const std::function<T(std::size_t)>& f);

} // namespace cil

#include "cil/detail/parallel.hpp"
